//! The triangle's affine sphere in closed form: `u = −c (ℓ₁ℓ₂ℓ₃)^{1/3}`
//! with the constant `c` fixed by `det D²u = u⁻⁴`.

use convexlab::affine_sphere::SolverConfig;
use convexlab::interp::AffineSphere;
use convexlab::projective::ConvexDomain;
use nalgebra::{Matrix2, Vector2};

fn vertices() -> [Vector2<f64>; 3] {
    [
        Vector2::new(-0.75, -0.5),
        Vector2::new(0.75, -0.5),
        Vector2::new(0.0, 1.0),
    ]
}

/// Affine edge functionals `a·x + b`, positive inside.
fn edges() -> Vec<(Vector2<f64>, f64)> {
    let v = vertices();
    (0..3)
        .map(|i| {
            let (p, q) = (v[i], v[(i + 1) % 3]);
            let n = Vector2::new(p.y - q.y, q.x - p.x);
            (n, -n.dot(&p))
        })
        .collect()
}

/// `g = (ℓ₁ℓ₂ℓ₃)^{1/3}` with its Hessian.
fn g_and_hessian(x: &Vector2<f64>) -> (f64, Matrix2<f64>) {
    let mut logg = 0.0;
    let mut grad = Vector2::zeros();
    let mut hess = Matrix2::zeros();
    for (a, b) in edges() {
        let l = a.dot(x) + b;
        logg += l.ln() / 3.0;
        grad += a / (3.0 * l);
        hess -= a * a.transpose() / (3.0 * l * l);
    }
    let g = logg.exp();
    (g, g * (grad * grad.transpose() + hess))
}

fn solve(h: f64) -> AffineSphere {
    AffineSphere::solve(
        &ConvexDomain::polygon(vertices().to_vec()).unwrap(),
        &SolverConfig {
            h,
            ..Default::default()
        },
    )
    .unwrap()
}

/// Largest `|κ|` over reliable nodes at least `dist` from the boundary.
fn max_abs_kappa(s: &AffineSphere, dist: f64) -> f64 {
    s.reliable_nodes()
        .into_iter()
        .filter(|&k| {
            s.domain().boundary_distance(&s.solution.grid.points[k]) > dist
                && s.field.kappa[k].is_finite()
        })
        .map(|k| s.field.kappa[k].abs())
        .fold(0.0, f64::max)
}

fn c_at(x: &Vector2<f64>) -> f64 {
    let (g, d2) = g_and_hessian(x);
    (1.0 / (g.powi(4) * d2.determinant())).powf(1.0 / 6.0)
}

#[test]
fn closed_form_constant_is_constant() {
    let c0 = c_at(&Vector2::zeros());
    for x in [
        Vector2::new(0.3, -0.2),
        Vector2::new(-0.4, -0.3),
        Vector2::new(0.0, 0.7),
        Vector2::new(0.6, -0.45),
    ] {
        assert!((c_at(&x) - c0).abs() < 1e-12 * c0);
    }
}

#[test]
fn solver_matches_closed_form() {
    let s = solve(1.0 / 64.0);
    let c = c_at(&Vector2::zeros());
    let mut worst = 0.0f64;
    for k in s.reliable_nodes() {
        let (g, _) = g_and_hessian(&s.solution.grid.points[k]);
        worst = worst.max((s.solution.u(k) + c * g).abs() / (c * g));
    }
    assert!(worst < 5e-3, "relative u error {worst}");
}

#[test]
fn blaschke_metric_is_flat() {
    let coarse = solve(1.0 / 32.0);
    let fine = solve(1.0 / 64.0);
    assert!(max_abs_kappa(&fine, 0.15) < 0.05);
    // The corner error shrinks with the mesh.
    assert!(max_abs_kappa(&fine, 0.0) < 0.6 * max_abs_kappa(&coarse, 0.0));
}
