//! The verification suites behind each command.

use qlattice::gleason::check_additivity;
use qlattice::lattice::{check_distributive, check_orthomodular, find_diamond, verify_orthoalgebra};
use qlattice::linalg::{hermitian_deviation, hermitian_eigen, op_norm};
use qlattice::p1::{berezin_symbol, build_sections, isotype, QuantizedGeometry, Refinement};
use qlattice::quadrature::QuadratureSpec;
use qlattice::semiclassics::{
    k_range, probability_sequence, szego_diagonal, szego_diagonal_integral, trace_sequence, tuynman_sequence,
    AsymptoticRun,
};
use qlattice::sphere::laplace_beltrami;
use qlattice::toeplitz::{povm_blocks, riemann_reconstruct, toeplitz, tuynman_deviation};
use qlattice::{
    CMatrix, GroupAction, HilbertSpace, RegionPartition, SectionSpace, SpherePoint, Subspace, Symbol,
    TruncatedHardySpace,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{CommandKind, RunConfig, SymbolSpec};
use crate::random;
use crate::report::{Check, Report};
use crate::CliError;

type Res<T> = Result<T, CliError>;

pub fn execute(cfg: &RunConfig) -> Res<Report> {
    let mut report = Report::new(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match cfg.command {
        CommandKind::LatticeCheck => {
            distributive_witness(&mut report, cfg.dim, "")?;
            orthomodular_sweep(&mut report, &mut rng, cfg.dim, cfg.trials, "")?;
            if cfg.dim >= 3 {
                additivity_sweep(&mut report, &mut rng, &[cfg.dim], cfg.trials.min(100), "")?;
            }
        }
        CommandKind::Quantize => {
            gram_checks(&mut report, cfg.max_k, cfg.volume, "")?;
            selection_rule(&mut report, cfg.max_k, "")?;
            let action = cfg.action();
            orthoalgebra(&mut report, &action, Refinement::Isotypic, cfg.max_k, cfg.volume, "")?;
            if matches!(action, GroupAction::Su2 { .. }) {
                orthoalgebra(&mut report, &action, Refinement::Atomic, cfg.max_k, cfg.volume, "")?;
            }
        }
        CommandKind::Toeplitz => toeplitz_checks(&mut report, cfg)?,
        CommandKind::Povm => {
            let space = build_sections(cfg.k, &cfg.geometry(cfg.k)?)?;
            povm_checks(&mut report, &space, cfg.bands, &cfg.symbol, "")?;
        }
        CommandKind::Asymptotics => asymptotics(&mut report, cfg)?,
        CommandKind::FullSuite => full_suite(&mut report, &mut rng, cfg)?,
    }
    Ok(report)
}

fn name(prefix: &str, s: &str) -> String {
    if prefix.is_empty() {
        s.to_owned()
    } else {
        format!("{prefix}/{s}")
    }
}

/// `X = span{e₁}`, `Y = span{e₂}`, `Z = span{e₁ + e₂}` in `C^dim`.
fn distributive_witness(report: &mut Report, dim: usize, prefix: &str) -> Res<()> {
    let h = HilbertSpace::complex(dim)?;
    let (e1, e2) = (h.basis_vector(0), h.basis_vector(1));
    let x = Subspace::span(&h, &[e1.clone()])?;
    let y = Subspace::span(&h, &[e2.clone()])?;
    let z = Subspace::span(&h, &[e1 + e2])?;
    let law = check_distributive(&x, &y, &z)?;
    let (lhs, rhs) = (law.lhs.dim(), law.rhs.dim());
    report.check(Check::holds(
        name(prefix, "distributive-witness"),
        !law.holds && lhs == 1 && rhs == 0,
        law.defect,
        "law fails with lhs rank 1 and rhs rank 0",
    ));
    let diamond = find_diamond(&[x, y, z])?;
    report.check(Check::holds(
        name(prefix, "diamond-witness"),
        diamond.is_some(),
        f64::from(u8::from(diamond.is_some())),
        "a diamond exists",
    ));
    report.detail(&name(prefix, "distributive"), json!({ "lhs_rank": lhs, "rhs_rank": rhs, "defect": law.defect }))?;
    if let Some(w) = diamond {
        report.detail(
            &name(prefix, "diamond"),
            json!({ "indices": w.indices, "bottom_rank": w.bottom.dim(), "top_rank": w.top.dim() }),
        )?;
    }
    Ok(())
}

fn orthomodular_sweep(report: &mut Report, rng: &mut ChaCha8Rng, dim: usize, trials: usize, prefix: &str) -> Res<()> {
    let h = HilbertSpace::complex(dim)?;
    let mut max_defect = 0.0_f64;
    let mut failures = 0usize;
    for _ in 0..trials {
        let (x, z) = random::nested_pair(rng, &h)?;
        let law = check_orthomodular(&x, &z)?;
        max_defect = max_defect.max(law.defect);
        failures += usize::from(!law.holds);
    }
    report.check(Check::at_most(name(prefix, &format!("orthomodular-dim{dim}")), max_defect, 1e-8));
    report.check(Check::at_most(name(prefix, &format!("orthomodular-failures-dim{dim}")), failures as f64, 0.0));
    Ok(())
}

fn additivity_sweep(report: &mut Report, rng: &mut ChaCha8Rng, dims: &[usize], trials: usize, prefix: &str) -> Res<()> {
    let mut worst = 0.0_f64;
    for t in 0..trials {
        let h = HilbertSpace::complex(dims[t % dims.len()])?;
        let state = random::density(rng, &h)?;
        let parts = random::resolution(rng, &h)?;
        let r = check_additivity(&state, &parts)?;
        worst = worst.max((r.sum - 1.0).abs());
    }
    report.check(Check::at_most(name(prefix, "gleason-additivity"), worst, 1e-9));
    Ok(())
}

#[derive(Serialize)]
struct GramRow {
    k: usize,
    dim: usize,
    relative_error: f64,
    offdiag_ratio: f64,
}

fn gram_checks(report: &mut Report, max_k: usize, volume: f64, prefix: &str) -> Res<()> {
    let mut rows = Vec::new();
    for k in 0..=max_k {
        let s = build_sections(k, &QuantizedGeometry::new(k).with_volume(volume)?)?;
        rows.push(GramRow { k, dim: s.dim(), relative_error: s.gram_relative_error(), offdiag_ratio: s.gram_offdiag_ratio() });
    }
    let err = rows.iter().map(|r| r.relative_error).fold(0.0, f64::max);
    let off = rows.iter().map(|r| r.offdiag_ratio).fold(0.0, f64::max);
    report.check(Check::at_most(name(prefix, "gram-closed-form"), err, 1e-10));
    report.check(Check::at_most(name(prefix, "gram-diagonal"), off, 1e-12));
    report.detail(&name(prefix, "gram"), rows)
}

fn selection_rule(report: &mut Report, max_k: usize, prefix: &str) -> Res<()> {
    let mut mismatches = 0usize;
    for k in 0..=max_k {
        let s = SectionSpace::standard(k)?;
        let kt = k as i64;
        for nu in -(kt + 2)..=kt + 2 {
            let nonzero = !isotype(&GroupAction::Torus, &s, nu)?.is_zero();
            mismatches += usize::from(nonzero != (nu.abs() <= kt && (kt - nu).rem_euclid(2) == 0));
        }
    }
    report.check(Check::at_most(name(prefix, "torus-selection-rule"), mismatches as f64, 0.0));
    Ok(())
}

#[derive(Serialize)]
struct ComponentRow {
    label: String,
    nu_g: i64,
    nu_t: i64,
    dim: usize,
    rep_dimension: usize,
}

fn orthoalgebra(
    report: &mut Report,
    action: &GroupAction,
    refinement: Refinement,
    max_k: usize,
    volume: f64,
    prefix: &str,
) -> Res<()> {
    let hardy = TruncatedHardySpace::new(0, max_k, volume)?;
    let comps = hardy.decompose(action, refinement)?;
    let tag = match refinement {
        Refinement::Isotypic => action.name().to_owned(),
        Refinement::Atomic => format!("{}-atomic", action.name()),
    };
    let spaces: Vec<Subspace> = comps.iter().map(|c| c.subspace.clone()).collect();
    let r = verify_orthoalgebra(&spaces)?;
    let total: usize = comps.iter().map(|c| c.dim()).sum();
    report.check(Check::holds(
        name(prefix, &format!("orthoalgebra-{tag}")),
        r.passed(),
        r.violations.len() as f64,
        "no orthogonality, direct-sum or orthomodular violations",
    ));
    report.check(Check::holds(
        name(prefix, &format!("dimension-partition-{tag}")),
        total == hardy.ambient().dim(),
        total as f64,
        format!("== {}", hardy.ambient().dim()),
    ));
    let rows: Vec<ComponentRow> = comps
        .iter()
        .map(|c| ComponentRow {
            label: c.label.clone(),
            nu_g: c.nu_g,
            nu_t: c.nu_t,
            dim: c.dim(),
            rep_dimension: c.rep_dimension,
        })
        .collect();
    report.detail(
        &name(prefix, &format!("components-{tag}")),
        json!({
            "components": rows,
            "orthogonality_checks": r.orthogonality_checks,
            "direct_sum_checks": r.direct_sum_checks,
            "orthomodular_checks": r.orthomodular_checks,
        }),
    )
}

/// `sup |f|` on a fine product grid.
fn sup_abs(f: &Symbol) -> f64 {
    QuadratureSpec::with_degree(160).rule().points().map(|(p, _)| f.eval(&p).norm()).fold(0.0, f64::max)
}

fn identity_distance(m: &CMatrix) -> f64 {
    op_norm(&(m - CMatrix::identity(m.nrows(), m.ncols())))
}

fn toeplitz_checks(report: &mut Report, cfg: &RunConfig) -> Res<()> {
    let k = cfg.k;
    let space = build_sections(k, &cfg.geometry(k)?)?;
    let f = cfg.symbol.symbol();
    let t = toeplitz(&f, &space);
    let sup = sup_abs(&f);
    report.check(Check::at_most("norm-contraction", t.norm(), sup + 1e-8));
    if f.is_real() {
        report.check(Check::at_most("hermitian", hermitian_deviation(t.matrix()), 1e-10));
        let (eig, _) = hermitian_eigen(t.matrix());
        if cfg.symbol == SymbolSpec::Height {
            let kf = k as f64;
            let err = (0..=k)
                .map(|a| (eig[a] - (2.0 * a as f64 - kf) / (kf + 2.0)).abs())
                .fold(0.0, f64::max);
            report.check(Check::at_most("height-spectrum", err, 1e-9));
        }
        report.detail("eigenvalues", eig)?;
    }
    if cfg.symbol == SymbolSpec::One {
        report.check(Check::at_most("identity", identity_distance(t.matrix()), 1e-12));
    }
    if k > 0 {
        let lap = laplace_beltrami(&f, space.geometry().metric_radius)?;
        let dev = tuynman_deviation(&f, &space)?;
        let bound = sup_abs(&lap) / (2.0 * k as f64);
        report.check(Check::at_most("tuynman-bound", dev, bound + 1e-9));
    }
    let sigma = berezin_symbol(t.matrix(), &SpherePoint::real(1.0, 1.0)?, &space)?;
    report.detail("berezin_at_1_1", [sigma.re, sigma.im])?;
    report.detail("operator", t.doc())
}

fn povm_checks(report: &mut Report, space: &SectionSpace, bands: usize, spec: &SymbolSpec, prefix: &str) -> Res<()> {
    let k = space.k();
    let part = RegionPartition::uniform(bands)?;
    let blocks = povm_blocks(&part, space)?;
    let mut min_eig = f64::INFINITY;
    let mut trace_err = 0.0_f64;
    let mut sum = CMatrix::zeros(k + 1, k + 1);
    for (b, (lo, hi)) in blocks.iter().zip(part.bands()) {
        min_eig = min_eig.min(hermitian_eigen(b.matrix()).0[0]);
        // Tr E(B) = (k + 1)·μ(B)
        trace_err = trace_err.max((b.trace().re - (k as f64 + 1.0) * 0.5 * (hi - lo)).abs());
        sum += b.matrix();
    }
    report.check(Check::holds(name(prefix, "povm-psd"), min_eig >= -1e-10, min_eig, ">= -1e-10"));
    report.check(Check::at_most(name(prefix, "povm-completeness"), identity_distance(&sum), 1e-9));
    report.check(Check::at_most(name(prefix, "povm-block-traces"), trace_err, 1e-9));

    let f = spec.symbol();
    let t = toeplitz(&f, space);
    let mut distances = Vec::new();
    let mut p = part;
    for level in 0..=4 {
        if level > 0 {
            p = p.refined()?;
        }
        let r = riemann_reconstruct(&f, &p, space)?;
        distances.push(op_norm(&(r.matrix() - t.matrix())));
    }
    let monotone = if spec.is_constant() {
        distances.iter().all(|d| *d <= 1e-12)
    } else {
        distances.windows(2).all(|w| w[1] < w[0])
    };
    report.check(Check::holds(
        name(prefix, "riemann-refinement"),
        monotone,
        distances[4],
        "strictly decreasing over 4 dyadic refinements",
    ));
    report.detail(&name(prefix, "riemann_distances"), distances)
}

fn run_checks(report: &mut Report, run: &AsymptoticRun, prefix: &str, exponent: Option<(f64, f64)>) -> Res<()> {
    let s = run.summary();
    report.check(Check::holds(
        name(prefix, "identity"),
        run.identity_holds(),
        s.max_abs_residual,
        format!("|trace - prediction| within {:e}", s.max_tolerance),
    ));
    if let Some((target, tol)) = exponent {
        match &run.leading_fit {
            Some(l) => report.check(Check::within(name(prefix, "leading-exponent"), l.exponent, target, tol)),
            None => report.check(Check::holds(name(prefix, "leading-exponent"), false, f64::NAN, "a fit")),
        }
    }
    report.detail(&name(prefix, "summary"), &s)
}

fn asymptotics(report: &mut Report, cfg: &RunConfig) -> Res<()> {
    let ks = k_range(cfg.k_min, cfg.k_max, cfg.k_step)?;
    let run = if cfg.symbol_explicit {
        let run = trace_sequence(&cfg.symbol.symbol(), &ks, cfg.volume)?;
        let expect = (cfg.symbol != SymbolSpec::Height && run.leading_fit.is_some()).then_some((1.0, 0.02));
        run_checks(report, &run, "trace", expect)?;
        run
    } else {
        let action = cfg.action();
        let nu = match (cfg.nu, action) {
            (None, GroupAction::Torus) => Some(0),
            (nu, _) => nu,
        };
        let run = probability_sequence(&action, nu, &ks, cfg.max_k.max(cfg.k_max), cfg.normalized)?;
        let expect = match (nu, action) {
            (None, _) | (Some(0), GroupAction::Circle) if run.leading_fit.is_some() => Some((1.0, 0.02)),
            (Some(_), GroupAction::Torus) if run.leading_fit.is_some() => Some((0.0, 0.02)),
            _ => None,
        };
        run_checks(report, &run, "probability", expect)?;
        if run.no_fit.is_some() {
            report.check(Check::holds("no-fit-flagged", run.fit.is_none(), 0.0, "all-zero sequences are not fitted"));
        }
        run
    };
    report.table = Some(run.to_csv()?);
    report.detail("run", &run)
}

fn full_suite(report: &mut Report, rng: &mut ChaCha8Rng, cfg: &RunConfig) -> Res<()> {
    distributive_witness(report, 2, "lattice")?;
    for dim in 2..=8 {
        orthomodular_sweep(report, rng, dim, cfg.trials, "lattice")?;
    }
    let dims: Vec<usize> = (3..=16).collect();
    additivity_sweep(report, rng, &dims, 100, "gleason")?;

    for action in [GroupAction::Circle, GroupAction::Torus, GroupAction::su2()] {
        orthoalgebra(report, &action, Refinement::Isotypic, cfg.max_k, cfg.volume, "peter-weyl")?;
    }
    orthoalgebra(report, &GroupAction::su2(), Refinement::Atomic, cfg.max_k, cfg.volume, "peter-weyl")?;
    gram_checks(report, 50, cfg.volume, "quantize")?;
    selection_rule(report, 50, "quantize")?;

    let mut spectrum = 0.0_f64;
    let mut identity = 0.0_f64;
    for k in 0..=40 {
        let s = SectionSpace::standard(k)?;
        let (eig, _) = hermitian_eigen(toeplitz(&Symbol::height(), &s).matrix());
        let kf = k as f64;
        for (a, e) in eig.iter().enumerate() {
            spectrum = spectrum.max((e - (2.0 * a as f64 - kf) / (kf + 2.0)).abs());
        }
        identity = identity.max(identity_distance(toeplitz(&Symbol::one(), &s).matrix()));
    }
    report.check(Check::at_most("toeplitz/height-spectrum", spectrum, 1e-9));
    report.check(Check::at_most("toeplitz/identity", identity, 1e-12));

    povm_checks(report, &SectionSpace::standard(10)?, cfg.bands, &SymbolSpec::Height, "povm")?;

    let dev = tuynman_deviation(&Symbol::height(), &SectionSpace::standard(10)?)?;
    report.check(Check::within("tuynman/k10", dev, 1.0 / 12.0, 1e-9));
    let tk = k_range(10, 100, 1)?;
    let run = tuynman_sequence(&Symbol::height(), &tk, &QuantizedGeometry::new(10))?;
    run_checks(report, &run, "tuynman", Some((-1.0, 0.05)))?;

    let all_k = k_range(0, 100, 1)?;
    for spec in [SymbolSpec::One, SymbolSpec::Height, SymbolSpec::RaisedHeight] {
        let run = trace_sequence(&spec.symbol(), &all_k, cfg.volume)?;
        let expect = (spec != SymbolSpec::Height).then_some((1.0, 0.02));
        run_checks(report, &run, &format!("trace/{spec}"), expect)?;
    }

    let mut spread = 0.0_f64;
    let mut integral = 0.0_f64;
    for k in 0..=40 {
        let s = SectionSpace::standard(k)?;
        let pts: Vec<SpherePoint> =
            (0..20).map(|_| SpherePoint::new(random::gaussian(rng), random::gaussian(rng))).collect::<Result<_, _>>()?;
        let d = szego_diagonal(&s, &pts);
        spread = spread.max(d.spread() / ((k + 1) as f64 / s.volume()));
        integral = integral.max((szego_diagonal_integral(&s) - (k + 1) as f64).abs());
    }
    report.check(Check::at_most("szego/diagonal-spread", spread, 1e-9));
    report.check(Check::at_most("szego/integral", integral, 1e-9));

    let circle = probability_sequence(&GroupAction::Circle, Some(0), &tk, 100, false)?;
    run_checks(report, &circle, "probability/circle", Some((1.0, 0.02)))?;
    let even: Vec<usize> = (10..=100).step_by(2).collect();
    let forbidden = probability_sequence(&GroupAction::Torus, Some(1), &even, 100, false)?;
    report.check(Check::holds(
        "probability/torus-forbidden",
        forbidden.fit.is_none() && forbidden.no_fit.is_some(),
        forbidden.traces.iter().sum(),
        "all-zero sequence flagged without fit",
    ));
    let trunc = cfg.max_k;
    let ks: Vec<usize> = (0..=trunc).collect();
    let mut total = 0.0;
    for nu in -(trunc as i64)..=trunc as i64 {
        total += probability_sequence(&GroupAction::Torus, Some(nu), &ks, trunc, true)?.traces.iter().sum::<f64>();
    }
    report.check(Check::within("probability/normalized-sum", total, 1.0, 1e-10));
    Ok(())
}
