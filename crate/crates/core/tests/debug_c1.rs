use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use pose_coreset::geometry::{centroid, cost, kabsch_rotation, kabsch_solve, PointSet, RotationMatrix};
use pose_coreset::pose_coreset::{pose_coreset, validate_coreset};

fn ranked_points(n: usize, d: usize, r: usize, rng: &mut ChaCha8Rng) -> PointSet {
    let coeff = DMatrix::<f64>::from_fn(n, r, |_, _| StandardNormal.sample(rng));
    let frame = RotationMatrix::random(d, rng);
    let basis = frame.matrix().columns(0, r).into_owned();
    PointSet::new(coeff * basis.transpose()).unwrap()
}

fn centered(p: &PointSet) -> PointSet {
    p.translated(&centroid(p, None).unwrap()).unwrap()
}

fn noisy_rotated(p: &PointSet, sigma: f64, rng: &mut ChaCha8Rng) -> PointSet {
    let r0 = RotationMatrix::random(p.dim(), rng);
    let mut q = p.matrix() * r0.matrix();
    if sigma > 0.0 {
        for v in q.iter_mut() {
            let g: f64 = StandardNormal.sample(rng);
            *v += sigma * g;
        }
    }
    PointSet::new(q).unwrap()
}

#[test]
fn debug_instance_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let p = centered(&ranked_points(100, 3, 2, &mut rng));
    let q = centered(&noisy_rotated(&p, 0.0, &mut rng));
    let coreset = pose_coreset(&p, &q).unwrap();
    println!("rank {}, sparsity {}", coreset.rank(), coreset.sparsity());
    println!("sigma: {:?}", coreset.factors().singular_values.as_slice());
    let e = coreset.conjugated_covariance(&p, &q).unwrap();
    println!("E = {e:.6}");

    let full = kabsch_rotation(&p, &q, None).unwrap();
    let opt = cost(&p, &q, &full, None, None).unwrap();
    let tilde = coreset.solve_rotation(&p, &q).unwrap();
    let got = cost(&p, &q, &tilde.rotation, None, None).unwrap();
    println!("base: opt {opt:.3e} got {got:.3e}");
    println!("tilde svals: {:?}", tilde.factors.singular_values.as_slice());

    for t in 0..12 {
        let a = RotationMatrix::random(3, &mut rng);
        let b = RotationMatrix::random(3, &mut rng);
        let mu = DVector::from_fn(3, |_, _| {
            let g: f64 = StandardNormal.sample(&mut rng);
            3.0 * g
        });
        let nu = DVector::from_fn(3, |_, _| {
            let g: f64 = StandardNormal.sample(&mut rng);
            3.0 * g
        });
        let res = validate_coreset(&coreset, &p, &q, &a, &b, &mu, &nu).unwrap();

        // Reproduce the internals for the failing ones.
        let pa = PointSet::new(p.matrix() * a.matrix()).unwrap();
        let qb = PointSet::new(q.matrix() * b.matrix()).unwrap();
        let (pt, qt, w) = coreset.extract_weighted_pairs(&pa, &qb).unwrap();
        let sol = kabsch_solve(&pt, &qt, Some(&w)).unwrap();
        let r = &sol.rotation;
        let ortho = (r.matrix().transpose() * r.matrix() - DMatrix::identity(3, 3))
            .abs()
            .max();
        let u_gram = (sol.factors.u.transpose() * &sol.factors.u - DMatrix::identity(3, 3))
            .abs()
            .max();
        let v_gram = (sol.factors.v.transpose() * &sol.factors.v - DMatrix::identity(3, 3))
            .abs()
            .max();
        println!(
            "transform {t}: residual {res:+.3e}; svals {:?} flip {} |R'R-I| {ortho:.2e} |U'U-I| {u_gram:.2e} |V'V-I| {v_gram:.2e}",
            sol.factors.singular_values.as_slice(),
            sol.factors.flipped
        );
        if res > 1e-6 {
            let ca = centroid(&pa, None).unwrap();
            let cb = centroid(&qb, None).unwrap();
            let pac = pa.translated(&ca).unwrap();
            let qbc = qb.translated(&cb).unwrap();
            let full_t = kabsch_rotation(&pac, &qbc, None).unwrap();
            let cs_cost_tilde = cost(&pt, &qt, &sol.rotation, None, Some(&w)).unwrap();
            let cs_cost_full = cost(&pt, &qt, &full_t, None, Some(&w)).unwrap();
            println!("  coreset-pair cost at tilde {cs_cost_tilde:.6e} at full-opt {cs_cost_full:.6e}");
            println!("  tilde = {:.6}", sol.rotation.matrix());
            println!("  fullR = {:.6}", full_t.matrix());
            let mt = pose_coreset::geometry::cross_covariance(&pt, &qt, Some(&w)).unwrap();
            println!("  coreset cov = {:.6}", mt);
            let mf = pac.matrix().transpose() * qbc.matrix();
            println!("  full cov (scaled 0.5) = {:.6}", mf * 0.5);
        }
    }
}
