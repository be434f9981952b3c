use std::f64::consts::PI;

use qlattice::gleason::{check_additivity, DensityOperator};
use qlattice::lattice::{find_diamond, verify_orthoalgebra};
use qlattice::p1::{berezin_symbol, decompose, isotype, Refinement};
use qlattice::quadrature::QuadratureSpec;
use qlattice::toeplitz::toeplitz;
use qlattice::{GroupAction, SectionSpace, SpherePoint, Subspace, Symbol, TruncatedHardySpace, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(rng: &mut ChaCha8Rng) -> SpherePoint {
    SpherePoint::new(
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
    )
    .unwrap()
}

#[test]
fn torus_isotypes_contain_diamonds() {
    let hardy = TruncatedHardySpace::up_to(5).unwrap();
    let comps = hardy.decompose(&GroupAction::Torus, Refinement::Isotypic).unwrap();
    assert!(comps.iter().all(|c| c.dim() == 1));
    let spaces: Vec<Subspace> = comps.iter().map(|c| c.subspace.clone()).collect();
    for i in 0..spaces.len() {
        for j in i + 1..spaces.len() {
            let w = find_diamond(&[spaces[i].clone(), spaces[j].clone()]).unwrap().expect("witness");
            assert!(w.bottom.is_zero());
            assert_eq!(w.top.dim(), 2);
        }
    }
}

#[test]
fn peter_weyl_families_are_orthoalgebras() {
    let hardy = TruncatedHardySpace::up_to(6).unwrap();
    for (action, refinement) in [
        (GroupAction::Circle, Refinement::Isotypic),
        (GroupAction::Torus, Refinement::Isotypic),
        (GroupAction::su2(), Refinement::Isotypic),
        (GroupAction::su2(), Refinement::Atomic),
    ] {
        let comps: Vec<Subspace> =
            hardy.decompose(&action, refinement).unwrap().into_iter().map(|c| c.subspace).collect();
        let report = verify_orthoalgebra(&comps).unwrap();
        assert!(report.passed(), "{}: {:?}", action.name(), report.violations);
    }
}

#[test]
fn isotype_probabilities_add_up() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let hardy = TruncatedHardySpace::up_to(4).unwrap();
    let n = hardy.ambient().dim();
    let comps: Vec<Subspace> = hardy
        .decompose(&GroupAction::Torus, Refinement::Isotypic)
        .unwrap()
        .into_iter()
        .map(|c| c.subspace)
        .collect();
    let factor = qlattice::CMatrix::from_fn(n, 3, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let state = DensityOperator::from_factor(hardy.ambient(), &factor).unwrap();
    let report = check_additivity(&state, &comps).unwrap();
    assert!(report.holds && report.resolves_identity);
    assert!((report.sum - 1.0).abs() < 1e-9);

    // The normalized Szegő state gives each isotype the weight dim/N.
    let mixed = DensityOperator::maximally_mixed(hardy.ambient());
    let report = check_additivity(&mixed, &comps).unwrap();
    for p in &report.parts {
        assert!((p.value - 1.0 / n as f64).abs() < 1e-12);
    }
}

#[test]
fn torus_selection_rule_is_exact() {
    for k in 0..=50usize {
        let s = SectionSpace::standard(k).unwrap();
        let kt = k as i64;
        for nu in -(kt + 3)..=kt + 3 {
            let nonzero = !isotype(&GroupAction::Torus, &s, nu).unwrap().is_zero();
            assert_eq!(nonzero, nu.abs() <= kt && (kt - nu).rem_euclid(2) == 0, "k={k} nu={nu}");
        }
    }
}

#[test]
fn decompositions_partition_dimension() {
    for k in [0, 1, 8, 21] {
        let s = SectionSpace::standard(k).unwrap();
        for action in [GroupAction::Circle, GroupAction::Torus, GroupAction::su2()] {
            let comps = decompose(&action, &s, Refinement::Isotypic).unwrap();
            assert_eq!(comps.iter().map(|c| c.dim()).sum::<usize>(), k + 1);
        }
    }
}

#[test]
fn berezin_symbol_of_height() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in [1, 2, 9, 30] {
        let s = SectionSpace::standard(k).unwrap();
        let t = toeplitz(&Symbol::height(), &s);
        let sigma = berezin_symbol(t.matrix(), &SpherePoint::real(1.0, 1.0).unwrap(), &s).unwrap();
        assert!(sigma.norm() < 1e-13, "k={k}");
        // Off the equator the symbol is the height itself times k/(k+2).
        for _ in 0..5 {
            let p = random_point(&mut rng);
            let sigma = berezin_symbol(t.matrix(), &p, &s).unwrap();
            let want = p.height() * k as f64 / (k as f64 + 2.0);
            assert!((sigma.re - want).abs() < 1e-12 && sigma.im.abs() < 1e-14);
        }
    }
}

#[test]
fn berezin_symbol_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let f = Symbol::custom("cos-bump", |p| {
        let x = p.cartesian();
        C64::new((3.0 * x[0]).cos() * x[2] + 0.3 * x[1] * x[1], 0.0)
    });
    let grid = QuadratureSpec::with_degree(120).rule();
    let values: Vec<f64> = grid.points().map(|(p, _)| f.eval(&p).re).collect();
    let (lo, hi) = values.iter().fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(*v), b.max(*v)));
    for k in [2, 10, 25] {
        let s = SectionSpace::standard(k).unwrap();
        let t = toeplitz(&f, &s);
        for _ in 0..20 {
            let sigma = berezin_symbol(t.matrix(), &random_point(&mut rng), &s).unwrap().re;
            assert!(sigma >= lo - 1e-9 && sigma <= hi + 1e-9);
        }
    }
}

#[test]
fn outputs_are_representative_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let s = SectionSpace::standard(7).unwrap();
    let t = toeplitz(&Symbol::harmonic(2, 1).unwrap(), &s);
    for _ in 0..10 {
        let p = random_point(&mut rng);
        let c = C64::new(rng.gen_range(0.1..3.0), rng.gen_range(-3.0..3.0));
        let q = p.rescaled(c).unwrap();
        let a = berezin_symbol(t.matrix(), &p, &s).unwrap();
        let b = berezin_symbol(t.matrix(), &q, &s).unwrap();
        assert!((a - b).norm() < 1e-12);
        for action in [GroupAction::Torus, GroupAction::su2()] {
            assert_eq!(
                format!("{:.12?}", action.moment_map(&p)),
                format!("{:.12?}", action.moment_map(&q))
            );
        }
    }
}

#[test]
fn gram_matches_closed_form_through_k50() {
    for k in 0..=50 {
        let s = SectionSpace::standard(k).unwrap();
        assert!(s.gram_relative_error() <= 1e-10, "k={k}");
        assert!(s.gram_offdiag_ratio() <= 1e-12, "k={k}");
        assert!((s.gram_closed_form()[0] - PI / (k as f64 + 1.0)).abs() < 1e-14);
    }
}
