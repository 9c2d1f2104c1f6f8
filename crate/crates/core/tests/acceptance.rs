// Copyright 2026 qhconvex contributors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::time::Instant;

use qhconvex::alcove::{alcove_project, classify, stabilizer_dim};
use qhconvex::polytope::{
    dominant_cell, sample_polytope, sample_real_polytope, su2_interval, verify_real_equality,
};
use qhconvex::qham::{beta, moment, Configuration, SurfaceGroupData};
use qhconvex::rng::{self, Purpose};
use qhconvex::solver::{
    gradient_check, solve_fiber_symmetric, transfer_from_symmetric, transfer_to_symmetric, SolveOptions,
};
use qhconvex::unitary::{dist, eigenphases, exp_alcove, haar_su, spectrum_to_alcove, tau, tau_minus};
use qhconvex::{AlcovePoint, ConjClassSpec, UnitaryMatrix};
use rand::Rng;

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn su2_data() -> SurfaceGroupData {
    SurfaceGroupData::punctured_sphere(vec![vec![0.2, -0.2], vec![0.15, -0.15]]).unwrap()
}

fn pt2(v: f64) -> AlcovePoint {
    AlcovePoint::with_default_tol(vec![v, -v]).unwrap()
}

fn random_classes<R: Rng>(n: usize, l: usize, rng: &mut R) -> Vec<ConjClassSpec> {
    (0..l).map(|_| ConjClassSpec::new(generic_alcove_point(n, rng))).collect()
}

fn alcove_gap(a: &UnitaryMatrix, b: &UnitaryMatrix) -> f64 {
    let (x, y) = (spectrum_to_alcove(a).unwrap(), spectrum_to_alcove(b).unwrap());
    x.coords().iter().zip(y.coords()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

fn c1_full_polytope() -> Outcome {
    let (lo_ref, hi_ref) = su2_interval_closed_form(0.2, 0.15);
    let oracle = su2_interval(0.2, 0.15, 1_000_000, 11).unwrap();
    let oracle_ok = (oracle.lo - lo_ref).abs() < 0.005 && (oracle.hi - hi_ref).abs() < 0.005;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let start = Instant::now();
    let cloud = pool.install(|| sample_polytope(&su2_data(), 100_000, 1)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let (lo, hi) = cloud.bounds().unwrap();
    let pass = oracle_ok
        && cloud.points.len() == 100_000
        && (lo[0] - SU2_REFERENCE.0).abs() <= 0.01
        && (hi[0] - SU2_REFERENCE.1).abs() <= 0.01
        && secs < 30.0;
    outcome(
        pass,
        format!(
            "cloud [{:.5}, {:.5}] vs oracle [{:.5}, {:.5}] (closed form {lo_ref}, {hi_ref}), {secs:.2}s single-threaded",
            lo[0], hi[0], oracle.lo, oracle.hi
        ),
    )
}

fn c2_real_equality() -> Outcome {
    let d = su2_data();
    let opts = SolveOptions { residual_tol: 1e-6, seed: 21, ..Default::default() };
    let full = sample_polytope(&d, 100_000, 1).unwrap();
    let real = sample_real_polytope(&d, 200, 1, &opts).unwrap();
    let rep = verify_real_equality(&full, &real, 21, &opts).unwrap();
    let residual_ok = rep.grid.iter().all(|g| g.converged && g.momentum_residual < 1e-6 && g.beta_residual < 1e-6);
    let pass = rep.grid_converged == 21 && residual_ok && rep.hausdorff <= 0.02;
    let max_mu = rep.grid.iter().map(|g| g.momentum_residual).fold(0.0, f64::max);
    let max_beta = rep.grid.iter().map(|g| g.beta_residual).fold(0.0, f64::max);
    outcome(
        pass,
        format!(
            "grid {}/21, max momentum residual {max_mu:.2e}, max beta residual {max_beta:.2e}, Hausdorff {:.4} ({} real points)",
            rep.grid_converged,
            rep.hausdorff,
            real.points.len()
        ),
    )
}

fn c3_fixed_point_fibers() -> Outcome {
    let d = su2_data();
    let (lo, hi) = su2_interval_closed_form(0.2, 0.15);
    let full = sample_polytope(&d, 10_000, 3).unwrap();
    let mut r = rng::stream(3, Purpose::Targets, 0);
    let inside: Vec<AlcovePoint> =
        (0..10).map(|_| full.points[r.random_range(0..full.points.len())].clone()).collect();
    let outside: Vec<AlcovePoint> = [0.0, 0.02, 0.04, 0.4, 0.5].iter().map(|&v| pt2(v)).collect();
    let mut agree = 0;
    for (k, t) in inside.iter().chain(&outside).enumerate() {
        let feasible = t.coords()[0] >= lo && t.coords()[0] <= hi;
        let opts = SolveOptions { residual_tol: 1e-6, seed: 300 + k as u64, ..Default::default() };
        let rep = solve_fiber_symmetric(&d, t, &opts).unwrap();
        if rep.converged() == feasible {
            agree += 1;
        }
    }
    outcome(agree == 15, format!("{agree}/15 targets agree with the oracle interval"))
}

fn c4_transfer() -> Outcome {
    let mut r = rng::from_seed(4);
    let mut worst_a_prod: f64 = 0.0;
    let mut worst_a_spec: f64 = 0.0;
    let mut worst_b_prod: f64 = 0.0;
    let mut worst_b_spec: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..100 {
        let n = r.random_range(2..=6);
        let l = r.random_range(1..=5);
        let a: Vec<UnitaryMatrix> = (0..l).map(|_| haar_su(n, &mut r)).collect();
        let u = transfer_from_symmetric(&a);
        let pa = product(&a.iter().map(|m| m.matrix().clone()).collect::<Vec<_>>(), n);
        let pu = product(&u.iter().map(|m| m.matrix().clone()).collect::<Vec<_>>(), n);
        worst_a_prod = worst_a_prod.max(dist(&pu, &(pa.transpose() * &pa)));
        for (aj, uj) in a.iter().zip(&u) {
            let sq = UnitaryMatrix::with_tol(aj.matrix().transpose() * aj.matrix(), 1e-9).unwrap();
            worst_a_spec = worst_a_spec.max(alcove_gap(uj, &sq));
        }

        // beta-fixed product-one chain from a product-one tuple
        let mut b: Vec<UnitaryMatrix> = (0..l).map(|_| haar_su(n, &mut r)).collect();
        let tail = product(&b[1..].iter().map(|m| m.matrix().clone()).collect::<Vec<_>>(), n);
        b[0] = UnitaryMatrix::with_tol(tail.adjoint(), 1e-9).unwrap();
        let w = transfer_from_symmetric(&b);
        match transfer_to_symmetric(&w, 1e-8) {
            Ok(a2) => {
                let p = product(&a2.iter().map(|m| m.matrix().clone()).collect::<Vec<_>>(), n);
                worst_b_prod = worst_b_prod.max(dist(&p, &qhconvex::unitary::identity(n)));
                for (aj, wj) in a2.iter().zip(&w) {
                    let sq = UnitaryMatrix::with_tol(aj.matrix().transpose() * aj.matrix(), 1e-9).unwrap();
                    worst_b_spec = worst_b_spec.max(alcove_gap(wj, &sq));
                }
            }
            Err(_) => failures += 1,
        }
    }
    let pass = worst_a_prod <= 1e-10
        && worst_a_spec <= 1e-9
        && failures == 0
        && worst_b_prod <= 1e-8
        && worst_b_spec <= 1e-8;
    outcome(
        pass,
        format!(
            "(a) identity {worst_a_prod:.1e}, spectra {worst_a_spec:.1e}; (b) product {worst_b_prod:.1e}, spectra {worst_b_spec:.1e}, {failures} rejected"
        ),
    )
}

fn c5_beta() -> Outcome {
    let mut r = rng::from_seed(5);
    let (mut inv, mut class, mut mu, mut eqv): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..1000 {
        let n = r.random_range(2..=5);
        let l = r.random_range(1..=6);
        let classes = (0..l).map(|_| ConjClassSpec::new(spectrum_to_alcove(&haar_su(n, &mut r)).unwrap())).collect();
        let d = SurfaceGroupData::new(n, 0, classes).unwrap();
        let cfg = Configuration::random(&d, &mut r);
        let b = beta(&cfg).unwrap();
        inv = inv.max(beta(&b).unwrap().max_dist(&cfg));
        for (bj, cj) in b.punctures().iter().zip(cfg.punctures()) {
            class = class.max(alcove_gap(bj, cj));
        }
        mu = mu.max(moment(&b).dist(&tau_minus(&moment(&cfg))));
        let u = haar_su(n, &mut r);
        eqv = eqv.max(beta(&cfg.act(&u)).unwrap().max_dist(&b.act(&tau(&u))));
    }
    let pass = inv <= 1e-10 && class <= 1e-8 && mu <= 1e-10 && eqv <= 1e-10;
    outcome(
        pass,
        format!("involution {inv:.1e}, class {class:.1e}, moment {mu:.1e}, equivariance {eqv:.1e} over 1000 configurations"),
    )
}

fn c6_cells() -> Outcome {
    let mut r = rng::from_seed(6);
    let mut matches = 0;
    let mut pair_matches = 0;
    for k in 0..500 {
        let n = r.random_range(2..=6);
        let (x, pairs) = if k % 2 == 0 { (generic_alcove_point(n, &mut r), 0) } else { degenerate_alcove_point(n, &mut r) };
        let sig = classify(&x, 1e-8).unwrap();
        let numeric = centralizer_dim(&exp_diag(x.coords()), 1e-8);
        if stabilizer_dim(&sig, n) == numeric {
            matches += 1;
        }
        if numeric == n - 1 + 2 * pairs {
            pair_matches += 1;
        }
    }
    outcome(matches == 500 && pair_matches == 500, format!("{matches}/500 exact matches"))
}

fn c7_uniqueness() -> Outcome {
    let mut r = rng::from_seed(7);
    let mut worst: f64 = 0.0;
    let mut idem: f64 = 0.0;
    for _ in 0..1000 {
        let n = r.random_range(2..=6);
        let u = haar_su(n, &mut r);
        let k = haar_su(n, &mut r);
        worst = worst.max(alcove_gap(&u, &u.conjugated_by(&k)));
        let x = spectrum_to_alcove(&u).unwrap();
        let again = alcove_project(x.coords(), 1e-9).unwrap();
        let via_exp = spectrum_to_alcove(&UnitaryMatrix::with_tol(exp_alcove(&x), 1e-9).unwrap()).unwrap();
        let phases = eigenphases(&u).unwrap();
        let direct = alcove_project(&phases, 1e-9).unwrap();
        for p in [&again, &via_exp, &direct] {
            idem = idem.max(x.coords().iter().zip(p.coords()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
    }
    outcome(worst <= 1e-9 && idem <= 1e-9, format!("conjugation {worst:.1e}, idempotence {idem:.1e}"))
}

fn c8_dominant() -> Outcome {
    let mut r = rng::from_seed(8);
    let mut lines = Vec::new();
    let mut pass = true;
    for n in [2, 3] {
        for l in [2, 3] {
            let d = SurfaceGroupData::new(n, 0, random_classes(n, l, &mut r)).unwrap();
            let cloud = sample_polytope(&d, 5000, 80 + (n * 10 + l) as u64).unwrap();
            match dominant_cell(&cloud, 1e-6) {
                Ok(dom) => {
                    let ok = dom.signature.z0.is_empty() && dom.signature.z1.is_empty() && dom.fraction >= 0.99;
                    pass &= ok;
                    lines.push(format!("n={n},l={l}: {:.4}", dom.fraction));
                }
                Err(e) => {
                    pass = false;
                    lines.push(format!("n={n},l={l}: {e}"));
                }
            }
        }
    }
    outcome(pass, lines.join("; "))
}

fn c9_gradient() -> Outcome {
    let mut r = rng::from_seed(9);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = r.random_range(2..=4);
        let g = r.random_range(0..=1);
        let l = r.random_range(1..=4);
        let d = SurfaceGroupData::new(n, g, random_classes(n, l, &mut r)).unwrap();
        let cfg = Configuration::random(&d, &mut r);
        let target = generic_alcove_point(n, &mut r);
        worst = worst.max(gradient_check(&d, &target, &cfg, 1e-6).unwrap());
    }
    outcome(worst <= 1e-5, format!("max check {worst:.2e} over 50 instances"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("SU(2) full polytope", c1_full_polytope),
        ("real convexity equality", c2_real_equality),
        ("fixed-point fiber criterion", c3_fixed_point_fibers),
        ("symmetric transfer", c4_transfer),
        ("beta properties", c5_beta),
        ("cell and stabilizer agreement", c6_cells),
        ("fundamental domain uniqueness", c7_uniqueness),
        ("dominant cell", c8_dominant),
        ("gradient validity", c9_gradient),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("criterion {}: {tag} {name}: {} [{:.1}s]", k + 1, o.detail, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {}/9 passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
