//! Unit conversions used at file and command-line boundaries.

/// Standard gravity, newtons per kilogram-force.
pub const NEWTONS_PER_KGF: f64 = 9.80665;

pub fn kgf_to_newtons(kgf: f64) -> f64 {
    kgf * NEWTONS_PER_KGF
}

pub fn newtons_to_kgf(newtons: f64) -> f64 {
    newtons / NEWTONS_PER_KGF
}

pub fn mm_to_m(mm: f64) -> f64 {
    mm / 1000.0
}

pub fn m_to_mm(m: f64) -> f64 {
    m * 1000.0
}

/// Converts an SI value back to a file unit such that converting the result
/// forward again reproduces `si` bit-for-bit whenever such a value exists
/// within a few ulps of the naive inverse.
pub(crate) fn exact_inverse(si: f64, to_si: impl Fn(f64) -> f64, from_si: impl Fn(f64) -> f64) -> f64 {
    let guess = from_si(si);
    if !guess.is_finite() || to_si(guess) == si {
        return guess;
    }
    let (mut up, mut down) = (guess, guess);
    for _ in 0..8 {
        up = up.next_up();
        if to_si(up) == si {
            return up;
        }
        down = down.next_down();
        if to_si(down) == si {
            return down;
        }
    }
    guess
}
