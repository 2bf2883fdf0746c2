//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls into the library's numerics.

#![allow(dead_code)]

use forearm_core::model::RobotModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat3 = [[f64; 3]; 3];
pub type Vec3 = [f64; 3];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn matmul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn matvec(a: &Mat3, v: &Vec3) -> Vec3 {
    [0, 1, 2].map(|i| (0..3).map(|k| a[i][k] * v[k]).sum())
}

fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Rotation by `theta` about unit axis `k`: `I + sinθ K + (1 − cosθ) K²`.
pub fn rodrigues(k: &Vec3, theta: f64) -> Mat3 {
    let n = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    let (x, y, z) = (k[0] / n, k[1] / n, k[2] / n);
    let kk = [[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]];
    let k2 = matmul(&kk, &kk);
    let (s, c) = theta.sin_cos();
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = if i == j { 1.0 } else { 0.0 } + s * kk[i][j] + (1.0 - c) * k2[i][j];
        }
    }
    r
}

/// `Rz(yaw) · Ry(pitch) · Rx(roll)`.
pub fn rpy_matrix(roll: f64, pitch: f64, yaw: f64) -> Mat3 {
    let (sr, cr) = roll.sin_cos();
    let (sp, cp) = pitch.sin_cos();
    let (sy, cy) = yaw.sin_cos();
    let rx = [[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]];
    let ry = [[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]];
    let rz = [[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]];
    matmul(&rz, &matmul(&ry, &rx))
}

/// Base-frame rotation and origin of `link`, by recursive chaining.
pub fn oracle_link_pose(model: &RobotModel, link: &str, angles: &[f64]) -> (Mat3, Vec3) {
    let l = model.links().iter().find(|l| l.name == link).unwrap();
    let Some(parent) = &l.parent else {
        return ([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], [0.0; 3]);
    };
    let (rp, pp) = oracle_link_pose(model, parent, angles);
    let fixed = rpy_matrix(l.rpy.x, l.rpy.y, l.rpy.z);
    let local = match model.joints().iter().position(|j| j.child_link == link) {
        Some(ji) => {
            let a = model.joints()[ji].axis;
            matmul(&rodrigues(&[a.x, a.y, a.z], angles[ji]), &fixed)
        }
        None => fixed,
    };
    let t = [l.translation.x, l.translation.y, l.translation.z];
    (matmul(&rp, &local), add(&pp, &matvec(&rp, &t)))
}

pub fn oracle_point(model: &RobotModel, link: &str, offset: &Vec3, angles: &[f64]) -> Vec3 {
    let (r, p) = oracle_link_pose(model, link, angles);
    add(&p, &matvec(&r, offset))
}

/// Single hinge about z at the child origin. The muscle runs from a point
/// `a` behind the joint on the parent to a point `b` from the joint on the
/// child at angle `phi0`. Lengths in millimeters.
pub fn cosine_toy_json(a_mm: f64, b_mm: f64, phi0: f64) -> String {
    let (bx, by) = (b_mm * phi0.cos(), b_mm * phi0.sin());
    format!(
        r#"{{
        "metadata": {{"name": "cosine_toy"}},
        "links": [
            {{"name": "upper"}},
            {{"name": "lower", "parent": "upper", "origin_mm": [200, 0, 0]}}
        ],
        "joints": [
            {{"name": "hinge", "child": "lower", "axis": [0, 0, 1], "limits_deg": [-170, 170]}}
        ],
        "actuators": [
            {{"name": "a", "gear_ratio": 157, "pulley_radius_mm": 4, "efficiency": 1.0,
             "continuous_max_tension_n": 424, "no_load_winding_rate_mm_s": 116,
             "winding_resistance_ohm": 1.0, "torque_constant_nm_per_a": 0.01}}
        ],
        "muscles": [
            {{"name": "m", "actuator": "a", "waypoints": [
                {{"link": "upper", "offset_mm": [{px}, 0, 0]}},
                {{"link": "lower", "offset_mm": [{bx}, {by}, 0]}}
            ]}}
        ]
    }}"#,
        px = 200.0 - a_mm
    )
}

/// Law of cosines for the toy: the interior angle at the joint is
/// `π − (phi0 + θ)`. Meters.
pub fn cosine_toy_length(a: f64, b: f64, phi0: f64, theta: f64) -> f64 {
    (a * a + b * b + 2.0 * a * b * (phi0 + theta).cos()).sqrt()
}

pub fn cosine_toy_derivative(a: f64, b: f64, phi0: f64, theta: f64) -> f64 {
    -a * b * (phi0 + theta).sin() / cosine_toy_length(a, b, phi0, theta)
}

/// Min and max of `Σ c_i f_i` over every vertex of `[0, f_max]`, summed in
/// index order.
pub fn vertex_bounds(coeffs: &[f64], f_max: &[f64]) -> (f64, f64) {
    let n = coeffs.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for mask in 0u32..(1 << n) {
        let mut v = 0.0;
        for i in 0..n {
            let f = if mask >> i & 1 == 1 { f_max[i] } else { 0.0 };
            v += coeffs[i] * f;
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Minimum-norm point of `{f : A f = τ, 0 ≤ f ≤ f_max}` for a 2×3 `A`,
/// found by searching the one-dimensional feasible segment.
///
/// The segment is `f = p + t·n` with `n` spanning the null space of `A` and
/// `p` the minimum-norm solution of `A f = τ`. A grid on `t` fine enough that
/// `f` moves at most `0.01 · min f_max` per cell locates the best cell, and a
/// golden-section search inside the neighbouring cells polishes it. Returns
/// `None` if the segment misses the box.
pub fn grid_qp_oracle(a: &[Vec3; 2], tau: &[f64; 2], f_max: &Vec3) -> Option<(Vec3, f64)> {
    let n = cross(&a[0], &a[1]);
    let nn = dot(&n, &n);
    // p = Aᵀ (A Aᵀ)⁻¹ τ
    let g = [[dot(&a[0], &a[0]), dot(&a[0], &a[1])], [dot(&a[1], &a[0]), dot(&a[1], &a[1])]];
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let y = [
        (g[1][1] * tau[0] - g[0][1] * tau[1]) / det,
        (-g[1][0] * tau[0] + g[0][0] * tau[1]) / det,
    ];
    let p = [0, 1, 2].map(|i| a[0][i] * y[0] + a[1][i] * y[1]);
    let un = n.map(|v| v / nn.sqrt());

    let (mut t_lo, mut t_hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..3 {
        if un[i].abs() < 1e-15 {
            if p[i] < -1e-9 || p[i] > f_max[i] + 1e-9 {
                return None;
            }
            continue;
        }
        let (t0, t1) = ((0.0 - p[i]) / un[i], (f_max[i] - p[i]) / un[i]);
        t_lo = t_lo.max(t0.min(t1));
        t_hi = t_hi.min(t0.max(t1));
    }
    if t_lo > t_hi + 1e-9 {
        return None;
    }
    let t_hi = t_hi.max(t_lo);
    let point = |t: f64| [0, 1, 2].map(|i| p[i] + t * un[i]);
    let obj = |t: f64| {
        let f = point(t);
        dot(&f, &f)
    };

    let step = 0.01 * f_max.iter().copied().fold(f64::INFINITY, f64::min);
    let cells = (((t_hi - t_lo) / step).ceil() as usize).max(1);
    let at = |k: usize| if k == cells { t_hi } else { t_lo + (t_hi - t_lo) * k as f64 / cells as f64 };
    let best = (0..=cells)
        .min_by(|&i, &j| obj(at(i)).total_cmp(&obj(at(j))))
        .unwrap();
    let (mut lo, mut hi) = (at(best.saturating_sub(1)), at((best + 1).min(cells)));
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let m1 = hi - r * (hi - lo);
        let m2 = lo + r * (hi - lo);
        if obj(m1) <= obj(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let t = 0.5 * (lo + hi);
    let f = point(t);
    Some((f, dot(&f, &f)))
}

/// Random in-limit posture in joint order.
pub fn random_posture<R: Rng>(model: &RobotModel, rng: &mut R) -> Vec<f64> {
    model
        .joints()
        .iter()
        .map(|j| rng.random_range(j.angle_min..=j.angle_max))
        .collect()
}
