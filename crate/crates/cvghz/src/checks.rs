//! Cross-validation of the two state representations.
//!
//! Every photon-operation scheme is built twice — once as a signed Gaussian
//! mixture, once in truncated Fock space — and click probabilities, effective
//! covariances and sampled Wigner values are compared. Small-squeezing
//! amplitude ratios of the conditioned states are checked against their
//! known leading-order forms. The CLI `oracle-check` subcommand prints one
//! line per entry and fails if any entry fails.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fock::{ghz_fock, FockBranchMixture};
use crate::ghz::{ghz_circuit, ghz_covariance, photon_operated_ghz, GhzParams, Mode, OpKind, PhotonOpSpec};

/// Default Fock cutoff for the equivalence runs; 18 keeps the truncation
/// error of the triple-subtraction covariance at r = 0.3 below the 1e-5
/// agreement gate.
pub const ORACLE_CUTOFF: usize = 18;

/// Agreement tolerance for probabilities, covariance entries and Wigner
/// values between the two representations.
pub const EQUIVALENCE_TOL: f64 = 1e-5;

/// Relative tolerance of the small-squeezing amplitude-ratio checks.
pub const RATIO_TOL: f64 = 0.05;

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct OracleCheck {
    pub name: String,
    pub passed: bool,
    pub max_err: f64,
}

impl OracleCheck {
    fn new(name: impl Into<String>, max_err: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            passed: max_err < tol,
            max_err,
        }
    }
}

fn scheme_name(ops: &[PhotonOpSpec]) -> String {
    if ops.is_empty() {
        return "ghz".into();
    }
    let kind = match ops[0].kind {
        OpKind::Subtract => "sub",
        OpKind::Add => "add",
    };
    let modes: Vec<String> = ops.iter().map(|op| op.mode.to_string()).collect();
    format!("{kind}:{}", modes.join(","))
}

fn fock_operated_ghz(r: f64, ops: &[PhotonOpSpec], cutoff: usize) -> crate::error::Result<FockBranchMixture> {
    let mut state = FockBranchMixture::from_pure(ghz_fock(r, cutoff)?);
    for op in ops {
        state = match op.kind {
            OpKind::Subtract => state.photon_subtract(op.mode.index(), op.coupling)?,
            OpKind::Add => state.photon_add(op.mode.index(), op.coupling)?,
        };
    }
    Ok(state)
}

/// The six photon-operation schemes of the study.
pub fn standard_schemes() -> Vec<Vec<PhotonOpSpec>> {
    let sub = PhotonOpSpec::subtract;
    let add = PhotonOpSpec::add;
    vec![
        vec![sub(Mode::A)],
        vec![sub(Mode::A), sub(Mode::B)],
        vec![sub(Mode::A), sub(Mode::B), sub(Mode::C)],
        vec![add(Mode::A)],
        vec![add(Mode::A), add(Mode::B)],
        vec![add(Mode::A), add(Mode::B), add(Mode::C)],
    ]
}

/// Runs the full equivalence suite; deterministic for a fixed seed.
pub fn run_oracle_checks(seed: u64) -> Vec<OracleCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    // Closed-form GHZ covariance against the circuit construction.
    for &r in &[0.3, 0.8] {
        let params = GhzParams::symmetric(r);
        let circuit = ghz_circuit(&params)
            .and_then(|s| s.effective_covariance())
            .expect("circuit construction");
        let err = (circuit.matrix() - ghz_covariance(&params).matrix()).abs().max();
        out.push(OracleCheck::new(format!("ghz-circuit-covariance/r={r}"), err, 1e-12));
    }

    // Fock-side GHZ covariance against the closed form.
    for &r in &[0.1, 0.3] {
        let fock = FockBranchMixture::from_pure(ghz_fock(r, ORACLE_CUTOFF).expect("converged"));
        let err = (fock.covariance().expect("covariance").matrix()
            - ghz_covariance(&GhzParams::symmetric(r)).matrix())
        .abs()
        .max();
        out.push(OracleCheck::new(format!("ghz-fock-covariance/r={r}"), err, 1e-6));
    }

    // Scheme-by-scheme equivalence of the two representations.
    for ops in standard_schemes() {
        let name = scheme_name(&ops);
        for &r in &[0.1, 0.3] {
            let gauss = photon_operated_ghz(r, &ops).expect("gaussian pipeline");
            let fock = fock_operated_ghz(r, &ops, ORACLE_CUTOFF).expect("fock pipeline");

            let p_err = (gauss.norm() - fock.success_probability()).abs();
            out.push(OracleCheck::new(
                format!("{name}/r={r}/probability"),
                p_err,
                EQUIVALENCE_TOL,
            ));

            let vg = gauss.effective_covariance().expect("covariance");
            let vf = fock.covariance().expect("covariance");
            let v_err = (vg.matrix() - vf.matrix()).abs().max();
            out.push(OracleCheck::new(
                format!("{name}/r={r}/covariance"),
                v_err,
                EQUIVALENCE_TOL,
            ));

            let eval = crate::phasespace::WignerEvaluator::new(&gauss).expect("evaluator");
            let mut points: Vec<Vec<f64>> = vec![vec![0.0; 6]];
            points.extend((0..20).map(|_| (0..6).map(|_| rng.gen_range(-1.5..1.5)).collect()));
            let mut w_err: f64 = 0.0;
            for point in &points {
                let wg = eval.normalized_value(point).expect("wigner");
                let wf = fock.wigner_value(point).expect("wigner");
                w_err = w_err.max((wg - wf).abs());
            }
            out.push(OracleCheck::new(
                format!("{name}/r={r}/wigner-points"),
                w_err,
                EQUIVALENCE_TOL,
            ));
        }
    }

    // Small-squeezing amplitude ratios of the conditioned states.
    out.extend(amplitude_ratio_checks());
    out
}

/// Leading-order Fock-amplitude structure at r = 0.01.
fn amplitude_ratio_checks() -> Vec<OracleCheck> {
    let r = 0.01;
    let cutoff = 10;
    let mut out = Vec::new();
    let sqrt2 = std::f64::consts::SQRT_2;
    let sqrt6 = 6f64.sqrt();

    let rel_err = |state: &crate::fock::FockArray, num: &[usize], den: &[usize], expected: f64| {
        let got = state.amplitude(num).re / state.amplitude(den).re;
        (got - expected).abs() / expected.abs()
    };
    // Fraction of the branch norm carried by the listed basis states.
    let dominance = |state: &crate::fock::FockArray, kets: &[&[usize]]| {
        let main: f64 = kets.iter().map(|ns| state.amplitude(ns).norm_sqr()).sum();
        1.0 - main / state.norm_sq()
    };

    let ghz = ghz_fock(r, cutoff).expect("converged");
    let mut err: f64 = 0.0;
    for ket in [[2, 0, 0], [0, 2, 0], [0, 0, 2]] {
        err = err.max(rel_err(&ghz, &ket, &[0, 0, 0], -sqrt2 / 6.0 * r));
    }
    for ket in [[1, 1, 0], [0, 1, 1], [1, 0, 1]] {
        err = err.max(rel_err(&ghz, &ket, &[0, 0, 0], 2.0 / 3.0 * r));
    }
    out.push(OracleCheck::new("fock-ratios/ghz", err, RATIO_TOL));

    let branch = |ops: &[PhotonOpSpec]| -> crate::fock::FockArray {
        fock_operated_ghz(r, ops, cutoff)
            .expect("fock pipeline")
            .single_click_branch()
            .expect("single-click branch present")
            .clone()
    };

    let sub = PhotonOpSpec::subtract;
    let add = PhotonOpSpec::add;

    // One subtraction: -(1/3)r|100⟩ + (2/3)r(|010⟩ + |001⟩).
    let sub_a = branch(&[sub(Mode::A)]);
    let err = rel_err(&sub_a, &[0, 1, 0], &[1, 0, 0], -2.0)
        .max(rel_err(&sub_a, &[0, 0, 1], &[1, 0, 0], -2.0));
    out.push(OracleCheck::new("fock-ratios/sub:A", err, RATIO_TOL));

    // Two subtractions: proportional to |000⟩ at leading order.
    let sub_ab = branch(&[sub(Mode::A), sub(Mode::B)]);
    out.push(OracleCheck::new(
        "fock-ratios/sub:A,B",
        dominance(&sub_ab, &[&[0, 0, 0]]),
        RATIO_TOL,
    ));

    // Three subtractions: the single-excitation (W-type) combination.
    let sub_abc = branch(&[sub(Mode::A), sub(Mode::B), sub(Mode::C)]);
    let err = rel_err(&sub_abc, &[0, 1, 0], &[1, 0, 0], 1.0)
        .max(rel_err(&sub_abc, &[0, 0, 1], &[1, 0, 0], 1.0))
        .max(dominance(&sub_abc, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]));
    out.push(OracleCheck::new("fock-ratios/sub:A,B,C", err, RATIO_TOL));

    // One addition.
    let add_a = branch(&[add(Mode::A)]);
    let mut err = rel_err(&add_a, &[3, 0, 0], &[1, 0, 0], -sqrt6 / 6.0 * r);
    for ket in [[1, 2, 0], [1, 0, 2]] {
        err = err.max(rel_err(&add_a, &ket, &[1, 0, 0], -sqrt2 / 6.0 * r));
    }
    for ket in [[2, 1, 0], [2, 0, 1]] {
        err = err.max(rel_err(&add_a, &ket, &[1, 0, 0], 2.0 * sqrt2 / 3.0 * r));
    }
    err = err.max(rel_err(&add_a, &[1, 1, 1], &[1, 0, 0], 2.0 / 3.0 * r));
    out.push(OracleCheck::new("fock-ratios/add:A", err, RATIO_TOL));

    // Two additions.
    let add_ab = branch(&[add(Mode::A), add(Mode::B)]);
    let mut err = rel_err(&add_ab, &[3, 1, 0], &[1, 1, 0], -sqrt6 / 6.0 * r)
        .max(rel_err(&add_ab, &[1, 3, 0], &[1, 1, 0], -sqrt6 / 6.0 * r))
        .max(rel_err(&add_ab, &[1, 1, 2], &[1, 1, 0], -sqrt2 / 6.0 * r));
    err = err.max(rel_err(&add_ab, &[2, 2, 0], &[1, 1, 0], 4.0 / 3.0 * r));
    for ket in [[1, 2, 1], [2, 1, 1]] {
        err = err.max(rel_err(&add_ab, &ket, &[1, 1, 0], 2.0 * sqrt2 / 3.0 * r));
    }
    out.push(OracleCheck::new("fock-ratios/add:A,B", err, RATIO_TOL));

    // Three additions.
    let add_abc = branch(&[add(Mode::A), add(Mode::B), add(Mode::C)]);
    let mut err: f64 = 0.0;
    for ket in [[3, 1, 1], [1, 3, 1], [1, 1, 3]] {
        err = err.max(rel_err(&add_abc, &ket, &[1, 1, 1], -r / sqrt6));
    }
    for ket in [[1, 2, 2], [2, 1, 2], [2, 2, 1]] {
        err = err.max(rel_err(&add_abc, &ket, &[1, 1, 1], 4.0 / 3.0 * r));
    }
    out.push(OracleCheck::new("fock-ratios/add:A,B,C", err, RATIO_TOL));

    out
}
