use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use clap::Args;
use dispkey::encryption::{
    adaptive_cutoff, diagonal_pair_distance, diagonal_pair_distance_bound, diagonal_recurrence, diagonal_step_bound,
    encrypt_closed_form_at, encrypt_monte_carlo, encrypted_distance, i_closed_form, i_quadrature, i_quadrature_cells,
    offdiag_row_sum, EncryptionParams, DEFAULT_MAX_CUTOFF, QUADRATURE_MAX_INDEX, QUADRATURE_MAX_SIGMA_SQ,
};
use dispkey::fock::PureFockState;
use dispkey::optics::{apply_lifted, ModeUnitary};
use dispkey::protocol::{
    connect_alice_with, outcome_probabilities, run_adaptive, run_passive, AliceOptions, BobServer, Circuit,
    ProtocolConfig, SessionResult, PROTOCOL_VERSION,
};
use dispkey::special_math::{binomial_u128, geometric_binomial_sum, lemma7_inequality_check};
use dispkey::Error;
use rayon::prelude::*;

use crate::presets;
use crate::report::{Cell, Report, ReportRow, Status};
use crate::Common;

/// Fidelity a protocol round trip must reach.
const FIDELITY_FLOOR: f64 = 1.0 - 1e-6;

pub enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

type Outcome = Result<bool, Failure>;

fn finish(common: &Common, report: &Report) -> Outcome {
    report
        .emit(common.format, common.out.as_deref())
        .map_err(|e| Failure::Usage(format!("cannot write report: {e}")))?;
    Ok(!report.failed())
}

fn check_sigma_sq(list: &[f64]) -> Result<(), Failure> {
    match list.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        Some(s) => Err(Failure::Usage(format!("sigma^2 values must be positive, got {s}"))),
        None if list.is_empty() => Err(Failure::Usage("empty --sigma-sq list".into())),
        None => Ok(()),
    }
}

fn params(sigma_sq: f64, tail_eps: f64) -> Result<EncryptionParams, Failure> {
    EncryptionParams::with_tail_eps(sigma_sq.sqrt(), tail_eps).map_err(usage)
}

fn millis(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_delimiter = ',', default_value = "4,16,64")]
    pub sigma_sq: Vec<f64>,
    /// State pair `A,B`; each side is fock:k, plus:k, random:SEED or a file. Repeatable.
    #[arg(long = "pair", default_value = "fock:0,fock:1")]
    pub pairs: Vec<String>,
    /// Photon cap for random:SEED presets.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tail_eps: f64,
}

pub fn verify_bound(common: &Common, args: VerifyArgs) -> Outcome {
    check_sigma_sq(&args.sigma_sq)?;
    let mut pairs = Vec::new();
    for p in &args.pairs {
        let (a, b) = p.split_once(',').ok_or_else(|| Failure::Usage(format!("--pair needs A,B, got {p:?}")))?;
        let sa = presets::single_mode_state(a, args.n).map_err(usage)?;
        let sb = presets::single_mode_state(b, args.n).map_err(usage)?;
        pairs.push((a.to_owned(), b.to_owned(), sa, sb));
    }
    let jobs: Vec<(usize, f64)> =
        (0..pairs.len()).flat_map(|p| args.sigma_sq.iter().map(move |&s| (p, s))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(p, s2)| {
            let start = Instant::now();
            let (a, b, sa, sb) = &pairs[p];
            let prm = params(s2, args.tail_eps)?;
            let rep = encrypted_distance(sa, sb, &prm)?;
            let (bound, status) = match (rep.bound, rep.satisfied()) {
                (Some(b), Some(ok)) => (Cell::Float(b), Status::from_bool(ok)),
                _ => (Cell::from("precondition-violated"), Status::PreconditionViolated),
            };
            Ok(ReportRow::new("trace-distance", rep.measured)
                .param("sigma_sq", s2)
                .param("sigma", prm.sigma())
                .param("n", rep.n)
                .param("state_a", a.as_str())
                .param("state_b", b.as_str())
                .param("cutoff", rep.cutoff)
                .param("tail_eps", args.tail_eps)
                .bound(bound)
                .error(rep.tail_error)
                .status(status)
                .runtime(millis(start)))
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let mut report = Report::new("verify-bound", !common.no_timestamp);
    report.rows = rows;
    finish(common, &report)
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4")]
    pub sigma_sq: Vec<f64>,
    /// Largest Fock index in the grid.
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    /// Quadrature refinement tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Monte-Carlo keys per sigma^2 for the channel comparison; 0 skips it.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// sigma^2 values of the Monte-Carlo comparison.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub mc_sigma_sq: Vec<f64>,
    /// Cutoff of the Monte-Carlo comparison.
    #[arg(long, default_value_t = 25)]
    pub mc_cutoff: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tail_eps: f64,
}

/// Agreement required between closed form and quadrature.
const ORACLE_TOL: f64 = 1e-6;

pub fn oracle_check(common: &Common, args: OracleArgs) -> Outcome {
    check_sigma_sq(&args.sigma_sq)?;
    if args.n > QUADRATURE_MAX_INDEX {
        return Err(Failure::Usage(format!("--n must be at most {QUADRATURE_MAX_INDEX}")));
    }
    if let Some(s) = args.sigma_sq.iter().find(|&&s| s > QUADRATURE_MAX_SIGMA_SQ) {
        return Err(Failure::Usage(format!("quadrature supports sigma^2 up to {QUADRATURE_MAX_SIGMA_SQ}, got {s}")));
    }
    let n = args.n;
    let cells: Vec<[usize; 4]> = (0..=n)
        .flat_map(|a| (0..=n).flat_map(move |b| (0..=n).flat_map(move |i| (0..=n).map(move |j| [a, b, i, j]))))
        .collect();
    let mut report = Report::new("oracle-check", !common.no_timestamp);
    for &s2 in &args.sigma_sq {
        let start = Instant::now();
        let prm = params(s2, args.tail_eps)?;
        let closed: Vec<f64> = cells.iter().map(|&[a, b, i, j]| i_closed_form(a, b, i, j, &prm)).collect();
        let quad = match i_quadrature_cells(&cells, &prm, args.tol) {
            Ok(q) => q.into_iter().map(Some).collect::<Vec<_>>(),
            Err(Error::QuadratureStalled { .. }) => cells
                .par_iter()
                .map(|&[a, b, i, j]| i_quadrature(a, b, i, j, &prm, args.tol).ok())
                .collect(),
            Err(e) => return Err(e.into()),
        };
        let mut worst = 0.0f64;
        let mut forbidden_closed = 0.0f64;
        let mut forbidden_quad = 0.0f64;
        let mut asym = 0.0f64;
        for (k, &[a, b, i, j]) in cells.iter().enumerate() {
            let Some(q) = quad[k] else {
                report.rows.push(
                    ReportRow::new("quadrature-failed", f64::NAN)
                        .param("sigma_sq", s2)
                        .param("cell", format!("{a}/{b}/{i}/{j}"))
                        .error(args.tol)
                        .status(Status::Fail),
                );
                continue;
            };
            worst = worst.max((closed[k] - q).abs());
            if b + i != a + j {
                forbidden_closed = forbidden_closed.max(closed[k].abs());
                forbidden_quad = forbidden_quad.max(q.abs());
            }
            let mirror = ((b * (n + 1) + a) * (n + 1) + j) * (n + 1) + i;
            asym = asym.max((closed[k] - closed[mirror]).abs());
            if let Some(qm) = quad[mirror] {
                asym = asym.max((q - qm).abs());
            }
        }
        let ms = millis(start);
        let row = |name: &str, measured: f64, ok: bool| {
            ReportRow::new(name, measured)
                .param("sigma_sq", s2)
                .param("n", n)
                .bound(ORACLE_TOL)
                .error(args.tol)
                .status(Status::from_bool(ok))
                .runtime(ms)
        };
        report.rows.push(row("closed-vs-quadrature", worst, worst <= ORACLE_TOL));
        report.rows.push(row("selection-rule", forbidden_quad, forbidden_closed == 0.0 && forbidden_quad <= ORACLE_TOL));
        report.rows.push(row("index-symmetry", asym, asym <= ORACLE_TOL));
    }
    if args.samples > 0 {
        check_sigma_sq(&args.mc_sigma_sq)?;
        let psi = PureFockState::random(1, n.min(2), &mut rand_seeded(common.seed)).map_err(usage)?;
        for &s2 in &args.mc_sigma_sq {
            let start = Instant::now();
            let prm = params(s2, args.tail_eps)?;
            let mc = encrypt_monte_carlo(&psi, &prm, args.samples, args.mc_cutoff, common.seed)?;
            let cf = encrypt_closed_form_at(&psi, &prm, args.mc_cutoff)?;
            let se = mc.std_error.as_ref().expect("Monte-Carlo densities carry standard errors");
            let dim = args.mc_cutoff + 1;
            let (mut worst, mut outside) = (0.0f64, 0usize);
            for r in 0..dim {
                for c in 0..dim {
                    let d = (mc.matrix.get(r, c) - cf.matrix.get(r, c)).norm();
                    let s = se[(r, c)];
                    let ratio = if s > 0.0 { d / s } else if d == 0.0 { 0.0 } else { f64::INFINITY };
                    worst = worst.max(ratio);
                    outside += usize::from(ratio > 3.0);
                }
            }
            report.rows.push(
                ReportRow::new("monte-carlo-channel", worst)
                    .param("sigma_sq", s2)
                    .param("n", psi.max_photons())
                    .param("samples", args.samples)
                    .param("cutoff", args.mc_cutoff)
                    .param("outside_3se", outside)
                    .bound(3.0)
                    .error(se.max())
                    .status(Status::from_bool(outside == 0))
                    .runtime(millis(start)),
            );
        }
    }
    finish(common, &report)
}

fn rand_seeded(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Args)]
pub struct LemmaArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,16")]
    pub sigma_sq: Vec<f64>,
    /// Largest photon number for the diagonal and row-sum checks.
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tail_eps: f64,
}

pub fn lemma_checks(common: &Common, args: LemmaArgs) -> Outcome {
    check_sigma_sq(&args.sigma_sq)?;
    let mut report = Report::new("lemma-checks", !common.no_timestamp);

    // closed form of sum_{a >= k} C(a, k) x^a against the series
    for &x in &[0.1, 0.5, 0.9] {
        for k in 0..=6u32 {
            let start = Instant::now();
            let closed = geometric_binomial_sum(x, k).map_err(usage)?;
            let (mut series, mut a) = (0.0, k as u64);
            loop {
                let term = binomial_u128(a, k as u64).expect("small binomial") as f64 * x.powi(a as i32);
                series += term;
                if term < 1e-18 * series {
                    break;
                }
                a += 1;
            }
            let rel = (closed - series).abs() / series;
            report.rows.push(
                ReportRow::new("geometric-binomial-sum", rel)
                    .param("x", x)
                    .param("k", k as usize)
                    .bound(1e-10)
                    .status(Status::from_bool(rel <= 1e-10))
                    .runtime(millis(start)),
            );
        }
    }

    for &s2 in &args.sigma_sq {
        let prm = params(s2, args.tail_eps)?;
        let start = Instant::now();
        let mut worst = 0.0f64;
        for i in 0..=8 {
            for a in 0..=8 {
                let (l, r) = diagonal_recurrence(i, a, &prm);
                worst = worst.max((l - r).abs());
            }
        }
        report.rows.push(
            ReportRow::new("diagonal-recurrence", worst)
                .param("sigma_sq", s2)
                .param("max_index", 8usize)
                .bound(1e-10)
                .status(Status::from_bool(worst <= 1e-10))
                .runtime(millis(start)),
        );

        for i in 0..args.n {
            let start = Instant::now();
            let d = diagonal_pair_distance(i, i + 1, &prm)?;
            let b = diagonal_step_bound(i, &prm);
            report.rows.push(
                ReportRow::new("diagonal-step", d.measured)
                    .param("sigma_sq", s2)
                    .param("i", i)
                    .param("j", i + 1)
                    .param("cutoff", d.cutoff)
                    .bound(b)
                    .error(d.tail)
                    .status(Status::from_bool(d.measured <= b + d.tail))
                    .runtime(millis(start)),
            );
        }
        for j in 1..=args.n {
            for i in 0..j {
                let start = Instant::now();
                let d = diagonal_pair_distance(i, j, &prm)?;
                let b = diagonal_pair_distance_bound(i, j, args.n, &prm)?;
                report.rows.push(
                    ReportRow::new("diagonal-pair", d.measured)
                        .param("sigma_sq", s2)
                        .param("i", i)
                        .param("j", j)
                        .param("cutoff", d.cutoff)
                        .bound(b.bound)
                        .error(d.tail)
                        .status(Status::from_bool(d.measured <= b.bound + d.tail))
                        .runtime(millis(start)),
                );
            }
        }
        for i in 0..=args.n {
            for k in 1..=3 {
                let start = Instant::now();
                let row = ReportRow::new("offdiag-row-sum", 0.0).param("sigma_sq", s2).param("i", i).param("k", k);
                let mut w = vec![0.0; i + k + 1];
                w[i + k] = 1.0;
                let (cutoff, _) = adaptive_cutoff(&w, &prm, DEFAULT_MAX_CUTOFF)?;
                let row = match offdiag_row_sum(i, k, &prm, cutoff) {
                    Ok(rs) => {
                        // the row sum never exceeds 1, so a bound at or above 1 says nothing
                        let status =
                            if rs.bound >= 1.0 { Status::Informational } else { Status::from_bool(rs.satisfied) };
                        ReportRow { measured: rs.measured, ..row }
                            .param("cutoff", cutoff)
                            .bound(rs.bound)
                            .error(rs.tail)
                            .status(status)
                    }
                    Err(Error::HypothesisViolated(_)) => {
                        row.bound("precondition-violated").status(Status::PreconditionViolated)
                    }
                    Err(e) => return Err(e.into()),
                };
                report.rows.push(row.runtime(millis(start)));
            }
        }
    }

    let start = Instant::now();
    for k in 0..=10u64 {
        let mut violations = 0usize;
        let mut checked = 0usize;
        for a in 0..=20u64 {
            for i in 0..=20u64 {
                for i2 in 0..=a.min(i) {
                    checked += 1;
                    violations += usize::from(!lemma7_inequality_check(a, i, i2, k));
                }
            }
        }
        report.rows.push(
            ReportRow::new("binomial-shift-inequality", violations as f64)
                .param("k", k as usize)
                .param("cases", checked)
                .bound(0.0)
                .status(Status::from_bool(violations == 0))
                .runtime(millis(start)),
        );
    }
    finish(common, &report)
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// Input state file; a seeded random state when omitted.
    #[arg(long)]
    pub state: Option<String>,
    /// random:SEED or a unitary file; random:<seed> when omitted.
    #[arg(long)]
    pub unitary: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    /// Modes of the random input state.
    #[arg(long, default_value_t = 2)]
    pub modes: usize,
    /// Photon cap of the random input state.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Independent runs at seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    pub runs: u64,
}

fn input_state(spec: Option<&str>, modes: usize, n: usize, seed: u64) -> Result<PureFockState, Failure> {
    match spec {
        Some(path) => PureFockState::read(path).map_err(usage),
        None => PureFockState::random(modes, n, &mut rand_seeded(seed)).map_err(usage),
    }
}

fn print_session(r: &SessionResult) {
    eprintln!("fidelity     {}", r.fidelity);
    eprintln!("|alpha|      {}", r.key.norm());
    eprintln!("|beta|       {}", r.beta.norm());
    if let Some(o) = r.outcome {
        eprintln!("outcome      {o} (p = {})", r.probability.unwrap_or(f64::NAN));
    }
    eprintln!("cutoffs      {:?}", r.cutoffs);
    for line in r.transcript.summary_lines() {
        eprintln!("  {line}");
    }
}

fn check_sigma(sigma: f64) -> Result<(), Failure> {
    if sigma.is_finite() && sigma >= 0.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--sigma must be non-negative, got {sigma}")))
    }
}

pub fn protocol_demo(common: &Common, args: DemoArgs) -> Outcome {
    check_sigma(args.sigma)?;
    let psi = input_state(args.state.as_deref(), args.modes, args.n, common.seed)?;
    let spec = args.unitary.clone().unwrap_or_else(|| format!("random:{}", common.seed));
    let u = presets::unitary(&spec, psi.modes()).map_err(usage)?;
    let runs: Vec<SessionResult> = (0..args.runs)
        .into_par_iter()
        .map(|k| run_passive(&psi, &u, args.sigma, common.seed + k))
        .collect::<Result<_, Error>>()?;
    let mut report = Report::new("protocol-demo", !common.no_timestamp);
    for (k, r) in runs.iter().enumerate() {
        report.rows.push(
            ReportRow::new("passive-round-trip", r.fidelity)
                .param("seed", common.seed + k as u64)
                .param("sigma", args.sigma)
                .param("modes", psi.modes())
                .param("n", psi.photon_support())
                .param("key_norm", r.key.norm())
                .param("beta_norm", r.beta.norm())
                .bound(FIDELITY_FLOOR)
                .error(r.leakage)
                .status(Status::from_bool(r.fidelity >= FIDELITY_FLOOR)),
        );
    }
    if let Some(first) = runs.first() {
        print_session(first);
    }
    finish(common, &report)
}

#[derive(Debug, Args)]
pub struct AdaptiveArgs {
    /// Input state file; |1,0,...,0> when omitted.
    #[arg(long)]
    pub state: Option<String>,
    /// Stage-1 unitary: random:SEED or a file; a 50/50 beamsplitter on modes 0 and 1 when omitted.
    #[arg(long)]
    pub unitary: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    #[arg(long, default_value_t = 2)]
    pub modes: usize,
    /// Measured mode; the last mode when omitted.
    #[arg(long)]
    pub measure: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub runs: u64,
}

/// Outcome `o` gets a phase `o pi` on the first unmeasured mode.
pub fn default_branches(modes: usize, measured: usize, max_outcome: usize) -> Result<BTreeMap<usize, ModeUnitary>, Error> {
    let target = (0..modes).find(|&j| j != measured).ok_or_else(|| {
        Error::InvalidParameter("adaptive runs need at least two modes".into())
    })?;
    (0..=max_outcome)
        .map(|o| Ok((o, ModeUnitary::phase_shifter(o as f64 * PI).embed(&[target], modes)?)))
        .collect()
}

fn stage1(spec: Option<&str>, modes: usize) -> Result<ModeUnitary, Failure> {
    match spec {
        Some(s) => presets::unitary(s, modes).map_err(usage),
        None if modes >= 2 => ModeUnitary::beamsplitter(PI / 4.0).embed(&[0, 1], modes).map_err(usage),
        None => Err(Failure::Usage("adaptive runs need at least two modes".into())),
    }
}

pub fn adaptive_demo(common: &Common, args: AdaptiveArgs) -> Outcome {
    check_sigma(args.sigma)?;
    let psi = match &args.state {
        Some(p) => PureFockState::read(p).map_err(usage)?,
        None => {
            let mut occ = vec![0; args.modes.max(1)];
            occ[0] = 1;
            PureFockState::number_state(&occ, 1).map_err(usage)?
        }
    };
    let m = psi.modes();
    let measured = args.measure.unwrap_or(m.saturating_sub(1));
    if measured >= m {
        return Err(Failure::Usage(format!("--measure {measured} out of range for {m} modes")));
    }
    let u1 = stage1(args.unitary.as_deref(), m)?;
    let branches = default_branches(m, measured, psi.photon_support()).map_err(usage)?;
    let base = ProtocolConfig::adaptive(u1.clone(), measured, branches, args.sigma, common.seed);
    base.validate().map_err(usage)?;
    let born = outcome_probabilities(&apply_lifted(&u1, &psi)?, measured)?;
    let start = Instant::now();
    let runs: Vec<SessionResult> = (0..args.runs)
        .into_par_iter()
        .map(|k| run_adaptive(&ProtocolConfig { seed: common.seed + k, ..base.clone() }, &psi))
        .collect::<Result<_, Error>>()?;
    let ms = millis(start);
    let mut report = Report::new("adaptive-demo", !common.no_timestamp);
    let worst = runs.iter().map(|r| r.fidelity).fold(f64::INFINITY, f64::min);
    report.rows.push(
        ReportRow::new("adaptive-fidelity-min", worst)
            .param("sigma", args.sigma)
            .param("runs", args.runs)
            .param("measured_mode", measured)
            .bound(FIDELITY_FLOOR)
            .error(runs.iter().map(|r| r.leakage).fold(0.0, f64::max))
            .status(Status::from_bool(worst >= FIDELITY_FLOOR))
            .runtime(ms),
    );
    let n = runs.len() as f64;
    let band = 3.0 / n.sqrt();
    for (o, &p) in born.iter().enumerate() {
        let hits = runs.iter().filter(|r| r.outcome == Some(o)).count();
        let f = hits as f64 / n;
        report.rows.push(
            ReportRow::new("outcome-frequency", f)
                .param("sigma", args.sigma)
                .param("runs", args.runs)
                .param("measured_mode", measured)
                .param("outcome", o)
                .bound(p)
                .error(band)
                .status(Status::from_bool((f - p).abs() <= band)),
        );
    }
    if let Some(first) = runs.first() {
        print_session(first);
    }
    finish(common, &report)
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Address to bind.
    #[arg(long, default_value = "127.0.0.1")]
    pub address: String,
    /// 0 picks a free port; the bound address is printed on stderr.
    #[arg(long, default_value_t = 7878)]
    pub port: u16,
    #[arg(long, default_value_t = 2)]
    pub modes: usize,
    /// Stage-1 unitary: random:SEED or a file; random:<seed> when omitted.
    #[arg(long)]
    pub unitary: Option<String>,
    /// Measured mode; makes the session adaptive.
    #[arg(long)]
    pub measure: Option<usize>,
    /// Largest outcome covered by the branch table.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Sessions to serve before exiting.
    #[arg(long, default_value_t = 1)]
    pub sessions: usize,
    /// Socket timeout in seconds.
    #[arg(long, default_value_t = 30)]
    pub timeout: u64,
}

pub fn serve(common: &Common, args: ServeArgs) -> Outcome {
    let spec = args.unitary.clone().unwrap_or_else(|| format!("random:{}", common.seed));
    let u = presets::unitary(&spec, args.modes).map_err(usage)?;
    let circuit = match args.measure {
        Some(k) => {
            let branches = default_branches(args.modes, k, args.n).map_err(usage)?;
            Circuit::adaptive(u, k, branches).map_err(usage)?
        }
        None => Circuit::passive(u),
    };
    let server = BobServer::bind((args.address.as_str(), args.port), circuit)
        .map_err(usage)?
        .with_timeout(Duration::from_secs(args.timeout));
    eprintln!("listening on {}", server.local_addr()?);
    let mut ok = true;
    for _ in 0..args.sessions {
        match server.serve_one() {
            Ok(outcome) => {
                eprintln!("session complete, outcome {:?}", outcome.outcome);
                for e in &outcome.events {
                    eprintln!("  {} {:?} {:?} {}", e.index, e.actor, e.kind, e.summary);
                }
            }
            Err(e) => {
                eprintln!("session failed: {e}");
                ok = false;
            }
        }
    }
    Ok(ok)
}

#[derive(Debug, Args)]
pub struct ConnectArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub address: String,
    #[arg(long, default_value_t = 7878)]
    pub port: u16,
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    #[arg(long, default_value_t = 2)]
    pub modes: usize,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 30)]
    pub timeout: u64,
    /// Protocol version announced in HELLO.
    #[arg(long, default_value_t = PROTOCOL_VERSION, hide = true)]
    pub protocol_version: u32,
}

pub fn connect(common: &Common, args: ConnectArgs) -> Outcome {
    check_sigma(args.sigma)?;
    let psi = input_state(args.state.as_deref(), args.modes, args.n, common.seed)?;
    let options = AliceOptions { version: args.protocol_version, ..AliceOptions::default() };
    let start = Instant::now();
    let r = connect_alice_with(
        (args.address.as_str(), args.port),
        &psi,
        args.sigma,
        common.seed,
        options,
        Duration::from_secs(args.timeout),
    )?;
    print_session(&r);
    let mut report = Report::new("connect", !common.no_timestamp);
    let mut row = ReportRow::new("networked-session", r.fidelity)
        .param("seed", common.seed)
        .param("sigma", args.sigma)
        .param("modes", psi.modes())
        .param("key_norm", r.key.norm())
        .param("beta_norm", r.beta.norm());
    if let Some(o) = r.outcome {
        row = row.param("outcome", o);
    }
    report.rows.push(
        row.bound(FIDELITY_FLOOR)
            .error(r.leakage)
            .status(Status::from_bool(r.fidelity >= FIDELITY_FLOOR))
            .runtime(millis(start)),
    );
    finish(common, &report)
}
