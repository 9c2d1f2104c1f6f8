// Copyright 2026 qhconvex contributors
// SPDX-License-Identifier: Apache-2.0

mod common;

use proptest::prelude::*;
use qhconvex::qham::{
    beta, beta_defect, chain_residual, decompose_witness, moment, twist_witness, Configuration, SurfaceGroupData,
};
use qhconvex::unitary::{commutator, haar_su, random_symmetric, spectrum_to_alcove, tau, tau_minus};
use qhconvex::{rng, ConjClassSpec, Error, UnitaryMatrix};

fn random_data(n: usize, l: usize, seed: u64) -> SurfaceGroupData {
    let mut r = rng::from_seed(seed);
    let classes = (0..l).map(|_| ConjClassSpec::new(spectrum_to_alcove(&haar_su(n, &mut r)).unwrap())).collect();
    SurfaceGroupData::new(n, 0, classes).unwrap()
}

/// `c_j = w_j w_{j+1}⁻¹` (cyclic) from symmetric `w_j`.
fn decomposable(n: usize, l: usize, seed: u64) -> Configuration {
    let mut r = rng::from_seed(seed);
    let w: Vec<UnitaryMatrix> = (0..l).map(|_| random_symmetric(n, &mut r).into_unitary()).collect();
    let c: Vec<UnitaryMatrix> = (0..l).map(|j| &w[j] * &w[(j + 1) % l].inverse()).collect();
    let classes = c.iter().map(|m| ConjClassSpec::new(spectrum_to_alcove(m).unwrap())).collect();
    let data = SurfaceGroupData::new(n, 0, classes).unwrap();
    Configuration::with_class_tol(data, vec![], c, 1e-7).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn beta_identities(n in 2usize..5, l in 1usize..6, seed in any::<u64>()) {
        let d = random_data(n, l, seed);
        let mut r = rng::from_seed(seed ^ 1);
        let cfg = Configuration::random(&d, &mut r);
        let b = beta(&cfg).unwrap();
        prop_assert!(beta(&b).unwrap().max_dist(&cfg) < 1e-10);
        prop_assert!(moment(&b).dist(&tau_minus(&moment(&cfg))) < 1e-10);
        let u = haar_su(n, &mut r);
        prop_assert!(beta(&cfg.act(&u)).unwrap().max_dist(&b.act(&tau(&u))) < 1e-10);
    }

    #[test]
    fn moment_is_equivariant(n in 2usize..5, l in 1usize..5, seed in any::<u64>()) {
        let d = random_data(n, l, seed);
        let mut r = rng::from_seed(seed ^ 2);
        let cfg = Configuration::random(&d, &mut r);
        let u = haar_su(n, &mut r);
        prop_assert!(moment(&cfg.act(&u)).dist(&moment(&cfg).conjugated_by(&u)) < 1e-10);
    }

    #[test]
    fn decomposable_configurations_decompose(n in 2usize..5, l in 2usize..5, seed in any::<u64>()) {
        let cfg = decomposable(n, l, seed);
        let phi = twist_witness(&cfg, 1e-8).unwrap();
        prop_assert!(phi.unitary().symmetry_defect() < 1e-8);
        let w = decompose_witness(&cfg, 1e-8).unwrap();
        prop_assert!(chain_residual(cfg.punctures(), &w) < 1e-7);
    }
}

#[test]
fn genus_one_moment_is_a_commutator() {
    let mut r = rng::from_seed(4);
    let d = SurfaceGroupData::new(3, 1, vec![]).unwrap();
    let cfg = Configuration::random(&d, &mut r);
    let h = cfg.handles();
    assert!(moment(&cfg).dist(&commutator(&h[0], &h[1])) < 1e-12);
    assert!(matches!(beta(&cfg), Err(Error::GenusUnsupported(1))));
}

#[test]
fn beta_fixed_iff_zero_defect() {
    let cfg = Configuration::diagonal(&random_data(3, 3, 7));
    assert!(beta_defect(&cfg).unwrap() < 1e-12);
    let cfg = Configuration::random(&random_data(3, 3, 7), &mut rng::from_seed(8));
    assert!(beta_defect(&cfg).unwrap() > 1e-3);
}

#[test]
fn out_of_class_component_rejected() {
    let d = random_data(2, 2, 9);
    let wrong = haar_su(2, &mut rng::from_seed(10));
    let res = Configuration::genus0(d, vec![wrong.clone(), wrong]);
    assert!(matches!(res, Err(Error::NotInClass { .. })));
}

#[test]
fn configuration_json_round_trip() {
    let cfg = decomposable(3, 3, 11);
    let text = serde_json::to_string(&cfg).unwrap();
    let back: Configuration = serde_json::from_str(&text).unwrap();
    assert!(back.max_dist(&cfg) < 1e-15);
}
