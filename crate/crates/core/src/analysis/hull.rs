use nalgebra::{Matrix3, Vector3};
use parry3d_f64::math::Vector as PVec;
use parry3d_f64::transformation::try_convex_hull;

/// Relative singular-value threshold below which a point cloud is treated as
/// flat (or lower-dimensional) and its hull volume as zero.
const FLATNESS: f64 = 1e-9;

/// Volume of the convex hull of `points`, m³. Degenerate clouds (fewer than
/// four points, collinear or coplanar) have volume zero.
pub fn convex_hull_volume(points: &[Vector3<f64>]) -> f64 {
    if points.len() < 4 {
        return 0.0;
    }
    let n = points.len() as f64;
    let centroid = points.iter().sum::<Vector3<f64>>() / n;
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    let sv = cov.symmetric_eigenvalues();
    let (lo, hi) = (sv.min(), sv.max());
    if hi <= 0.0 || lo.max(0.0).sqrt() <= FLATNESS * hi.sqrt() {
        return 0.0;
    }

    // Hull of centered points keeps the signed-tetrahedron sum well conditioned.
    let centered: Vec<PVec> = points
        .iter()
        .map(|p| {
            let d = p - centroid;
            PVec::new(d.x, d.y, d.z)
        })
        .collect();
    let Ok((vertices, faces)) = try_convex_hull(&centered) else {
        return 0.0;
    };
    let volume: f64 = faces
        .iter()
        .map(|f| {
            let a = vertices[f[0] as usize];
            let b = vertices[f[1] as usize];
            let c = vertices[f[2] as usize];
            a.dot(b.cross(c))
        })
        .sum::<f64>()
        / 6.0;
    volume.abs()
}
