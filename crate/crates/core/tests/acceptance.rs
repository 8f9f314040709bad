//! Acceptance suite. Prints one line per criterion and exits nonzero when
//! any criterion fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use dispkey::encryption::{
    adaptive_cutoff, diagonal_pair_distance, diagonal_pair_distance_bound, diagonal_recurrence,
    diagonal_step_bound, encrypt_closed_form, encrypt_closed_form_at, encrypt_monte_carlo, encrypted_distance,
    i_closed_form, i_quadrature, i_quadrature_cells, offdiag_row_sum, EncryptionParams, DEFAULT_MAX_CUTOFF,
};
use dispkey::fock::PureFockState;
use dispkey::optics::{commutation_residual, lift_unitary, DisplacementKey, FockSector, ModeUnitary};
use dispkey::protocol::{connect_alice, run_adaptive, run_passive, BobServer, ProtocolConfig};
use dispkey::special_math::{binomial_u128, geometric_binomial_sum, lemma7_inequality_check};
use dispkey::{Error, Result, C64};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

struct Criterion {
    id: &'static str,
    name: &'static str,
    budget: Duration,
    run: fn() -> Result<Verdict>,
}

fn params(sigma_sq: f64) -> EncryptionParams {
    EncryptionParams::from_sigma_sq(sigma_sq).expect("positive sigma^2")
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn oracle_equivalence() -> Result<Verdict> {
    let cells: Vec<[usize; 4]> = (0..=5)
        .flat_map(|a| (0..=5).flat_map(move |b| (0..=5).flat_map(move |i| (0..=5).map(move |j| [a, b, i, j]))))
        .collect();
    let mut worst = 0.0f64;
    let mut failed = 0usize;
    for s2 in [0.5, 1.0, 2.0, 4.0] {
        let prm = params(s2);
        let quad: Vec<Option<f64>> = match i_quadrature_cells(&cells, &prm, 1e-8) {
            Ok(q) => q.into_iter().map(Some).collect(),
            Err(Error::QuadratureStalled { .. }) => {
                cells.iter().map(|&[a, b, i, j]| i_quadrature(a, b, i, j, &prm, 1e-8).ok()).collect()
            }
            Err(e) => return Err(e),
        };
        for (&[a, b, i, j], q) in cells.iter().zip(quad) {
            match q {
                Some(q) => worst = worst.max((i_closed_form(a, b, i, j, &prm) - q).abs()),
                None => failed += 1,
            }
        }
    }
    Ok(Verdict::new(
        failed == 0 && worst <= 1e-6,
        format!("max |closed - quadrature| = {worst:.2e} (limit 1e-6), {failed} quadrature failures over 4 x 1296 cells"),
    ))
}

fn selection_symmetry() -> Result<Verdict> {
    let (mut forbidden, mut negative, mut asym, mut cells) = (0usize, 0usize, 0.0f64, 0usize);
    for s2 in [0.5, 1.0, 2.0, 4.0, 16.0] {
        let prm = params(s2);
        for a in 0..=40 {
            for b in 0..=40 {
                for i in 0..=6 {
                    for j in 0..=6 {
                        cells += 1;
                        let v = i_closed_form(a, b, i, j, &prm);
                        if b + i != a + j && v != 0.0 {
                            forbidden += 1;
                        }
                        if v.is_nan() || v < 0.0 {
                            negative += 1;
                        }
                        let m = i_closed_form(b, a, j, i, &prm);
                        asym = asym.max((v - m).abs() / v.abs().max(f64::MIN_POSITIVE));
                    }
                }
            }
        }
    }
    Ok(Verdict::new(
        forbidden == 0 && negative == 0 && asym <= 1e-12,
        format!("{cells} cells: {forbidden} selection-rule breaks, {negative} negative, max relative asymmetry {asym:.1e}"),
    ))
}

/// Ten seeded single-mode states with photon caps 0..=4, repeated.
fn grid_states() -> Result<Vec<PureFockState>> {
    (0..10u64).map(|s| PureFockState::random(1, (s % 5) as usize, &mut rng(s))).collect()
}

fn trace_preservation() -> Result<Verdict> {
    let mut worst = 0.0f64;
    for psi in grid_states()? {
        for s2 in [2.0, 10.0, 50.0] {
            let enc = encrypt_closed_form(&psi, &params(s2))?;
            worst = worst.max((enc.matrix.trace() - 1.0).abs());
        }
    }
    Ok(Verdict::new(worst <= 1e-10, format!("max |trace - 1| = {worst:.2e} (limit 1e-10) over 30 densities")))
}

fn positivity() -> Result<Verdict> {
    let mut lowest = f64::INFINITY;
    for psi in grid_states()? {
        for s2 in [2.0, 10.0, 50.0] {
            let enc = encrypt_closed_form(&psi, &params(s2))?;
            lowest = lowest.min(enc.matrix.min_eigenvalue());
        }
    }
    Ok(Verdict::new(lowest >= -1e-8, format!("min eigenvalue = {lowest:.2e} (limit -1e-8) over 30 densities")))
}

fn monte_carlo_agreement() -> Result<Verdict> {
    let (samples, cutoff) = (100_000, 25);
    let psi = PureFockState::random(1, 2, &mut rng(0))?;
    let prm = params(1.0);
    let mc = encrypt_monte_carlo(&psi, &prm, samples, cutoff, 0)?;
    let cf = encrypt_closed_form_at(&psi, &prm, cutoff)?;
    let se = mc.std_error.as_ref().expect("Monte-Carlo densities carry standard errors");
    let (mut worst, mut outside) = (0.0f64, 0usize);
    for r in 0..=cutoff {
        for c in 0..=cutoff {
            let d = (mc.matrix.get(r, c) - cf.matrix.get(r, c)).norm();
            let s = se[(r, c)];
            let ratio = if s > 0.0 { d / s } else if d == 0.0 { 0.0 } else { f64::INFINITY };
            worst = worst.max(ratio);
            outside += usize::from(ratio > 3.0);
        }
    }
    Ok(Verdict::new(
        outside == 0,
        format!("{outside} of {} entries beyond 3 SE, worst {worst:.2} SE (n=2, sigma^2=1, {samples} samples)", (cutoff + 1).pow(2)),
    ))
}

fn series_sum(x: f64, k: u32) -> f64 {
    let (mut sum, mut a) = (0.0, k as u64);
    loop {
        let term = binomial_u128(a, k as u64).expect("small binomial") as f64 * x.powi(a as i32);
        sum += term;
        if term < 1e-18 * sum {
            return sum;
        }
        a += 1;
    }
}

fn combinatorial_identities() -> Result<Verdict> {
    let mut recurrence = 0.0f64;
    for s2 in [1.0, 4.0] {
        let prm = params(s2);
        for i in 0..=8 {
            for a in 0..=8 {
                let (l, r) = diagonal_recurrence(i, a, &prm);
                recurrence = recurrence.max((l - r).abs());
            }
        }
    }
    let mut geometric = 0.0f64;
    for x in [0.1, 0.5, 0.9] {
        for k in 0..=6 {
            let series = series_sum(x, k);
            geometric = geometric.max((geometric_binomial_sum(x, k)? - series).abs() / series);
        }
    }
    let mut violations = 0usize;
    for k in 0..=10u64 {
        for a in 0..=20u64 {
            for i in 0..=20u64 {
                for i2 in 0..=a.min(i) {
                    violations += usize::from(!lemma7_inequality_check(a, i, i2, k));
                }
            }
        }
    }
    Ok(Verdict::new(
        recurrence <= 1e-10 && geometric <= 1e-10 && violations == 0,
        format!(
            "diagonal recurrence {recurrence:.1e}, geometric sum rel {geometric:.1e} (limits 1e-10), binomial shift violations {violations}"
        ),
    ))
}

fn diagonal_and_row_sum_bounds() -> Result<Verdict> {
    let n = 5;
    let (mut diag_checked, mut diag_fail) = (0usize, 0usize);
    let (mut row_checked, mut row_fail) = (0usize, 0usize);
    let mut worst_row = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0usize, 0usize);
    for s2 in [1.0, 2.0, 4.0, 16.0] {
        let prm = params(s2);
        for i in 0..n {
            let d = diagonal_pair_distance(i, i + 1, &prm)?;
            diag_checked += 1;
            diag_fail += usize::from(d.measured > diagonal_step_bound(i, &prm) + d.tail);
        }
        for j in 1..=n {
            for i in 0..j {
                let d = diagonal_pair_distance(i, j, &prm)?;
                diag_checked += 1;
                diag_fail += usize::from(d.measured > diagonal_pair_distance_bound(i, j, n, &prm)?.bound + d.tail);
            }
        }
        for i in 0..=n {
            for k in 1..=3 {
                let mut w = vec![0.0; i + k + 1];
                w[i + k] = 1.0;
                let (cutoff, _) = adaptive_cutoff(&w, &prm, DEFAULT_MAX_CUTOFF)?;
                let rs = offdiag_row_sum(i, k, &prm, cutoff)?;
                row_checked += 1;
                if !rs.satisfied {
                    row_fail += 1;
                    let excess = (rs.measured + rs.tail) / rs.bound;
                    if excess > worst_row.0 {
                        worst_row = (excess, rs.measured, rs.bound, s2, i, k);
                    }
                }
            }
        }
    }
    let mut detail = format!(
        "diagonal bounds {diag_fail}/{diag_checked} violated, off-diagonal row sums {row_fail}/{row_checked} violated"
    );
    if row_fail > 0 {
        let (r, m, b, s2, i, k) = worst_row;
        detail += &format!(" (worst sigma^2={s2} i={i} k={k}: sum {m:.3e} vs bound {b:.3e}, ratio {r:.1})");
    }
    Ok(Verdict::new(diag_fail == 0 && row_fail == 0, detail))
}

fn security_bound_pairs() -> Result<Verdict> {
    let (mut checked, mut failed, mut ratio) = (0usize, 0usize, 0.0f64);
    for k in 0..20u64 {
        let n = 1 + (k % 3) as usize;
        let mut r = rng(1000 + k);
        let a = PureFockState::random(1, n, &mut r)?;
        let b = PureFockState::random(1, n, &mut r)?;
        for s2 in [2.0, 4.0, 16.0, 64.0] {
            let d = encrypted_distance(&a, &b, &params(s2))?;
            let bound = d.bound.expect("sigma^2 >= 2 carries a bound");
            checked += 1;
            failed += usize::from(d.satisfied() != Some(true));
            ratio = ratio.max(d.measured / bound);
        }
    }
    Ok(Verdict::new(
        failed == 0,
        format!("{failed}/{checked} pairs above the trace-distance bound, worst measured/bound {ratio:.3}"),
    ))
}

fn secrecy_scaling() -> Result<Verdict> {
    let zero = PureFockState::single_mode(vec![C64::new(1.0, 0.0)])?;
    let one = PureFockState::single_mode(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)])?;
    let mut pts = Vec::new();
    for s2 in [4.0, 8.0, 16.0, 32.0, 64.0f64] {
        let d = encrypted_distance(&zero, &one, &params(s2))?;
        pts.push((0.5 * s2.ln(), d.measured.ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(Verdict::new(slope <= -1.8, format!("slope of ln distance against ln sigma = {slope:.3} (limit -1.8)")))
}

fn commutation_round_trip() -> Result<Verdict> {
    let (mut residual, mut deficit) = (0.0f64, 0.0f64);
    for seed in 0..20u64 {
        let n = 1 + (seed % 2) as usize;
        let mut r = rng(seed);
        let psi = PureFockState::random(2, n, &mut r)?;
        let u = ModeUnitary::haar_random(2, seed);
        let alpha = DisplacementKey::sample(2, 0.5, &mut r)?;
        residual = residual.max(commutation_residual(&u, &alpha, &psi)?);
        deficit = deficit.max(1.0 - run_passive(&psi, &u, 0.5, seed)?.fidelity);
    }
    Ok(Verdict::new(
        residual <= 1e-6 && deficit <= 1e-6,
        format!("max commutation residual {residual:.2e}, max fidelity deficit {deficit:.2e} (limits 1e-6) over 20 seeds"),
    ))
}

fn lift_correctness() -> Result<Verdict> {
    let (mut unitarity, mut homomorphism) = (0.0f64, 0.0f64);
    for (m, n) in [(2, 1), (2, 3), (3, 2), (3, 4), (4, 3)] {
        let sector = FockSector::new(m, n)?;
        let u = ModeUnitary::haar_random(m, 10 * m as u64 + n as u64);
        let v = ModeUnitary::haar_random(m, 100 + 10 * m as u64 + n as u64);
        let (lu, lv, luv) = (lift_unitary(&u, &sector)?, lift_unitary(&v, &sector)?, lift_unitary(&u.compose(&v)?, &sector)?);
        let id = DMatrix::<C64>::identity(lu.nrows(), lu.ncols());
        unitarity = unitarity.max((lu.adjoint() * &lu - id).camax());
        homomorphism = homomorphism.max((&lu * &lv - luv).camax());
    }
    let sector = FockSector::new(2, 2)?;
    let bs = lift_unitary(&ModeUnitary::beamsplitter(PI / 4.0), &sector)?;
    let k = sector.index_of(&[1, 1]).expect("|1,1> lies in the two-photon sector");
    let hom = bs[(k, k)].norm();
    Ok(Verdict::new(
        unitarity <= 1e-9 && homomorphism <= 1e-9 && hom <= 1e-12,
        format!("unitarity {unitarity:.1e}, homomorphism {homomorphism:.1e} (limits 1e-9), HOM coincidence amplitude {hom:.1e} (limit 1e-12)"),
    ))
}

/// `|1,1>` through a balanced beamsplitter, mode 1 measured, phase feedforward.
fn hom_config(sigma: f64, seed: u64) -> Result<(ProtocolConfig, PureFockState)> {
    let branches: BTreeMap<usize, ModeUnitary> = (0..=2)
        .map(|o| Ok((o, ModeUnitary::phase_shifter(o as f64 * PI / 2.0).embed(&[0], 2)?)))
        .collect::<Result<_>>()?;
    let config = ProtocolConfig::adaptive(ModeUnitary::beamsplitter(PI / 4.0), 1, branches, sigma, seed);
    config.validate()?;
    Ok((config, PureFockState::number_state(&[1, 1], 2)?))
}

fn adaptive_protocol() -> Result<Verdict> {
    let mut deficit = 0.0f64;
    for seed in 0..20 {
        let (config, psi) = hom_config(0.0, seed)?;
        deficit = deficit.max(1.0 - run_adaptive(&config, &psi)?.fidelity);
    }

    let runs = 10_000u64;
    let mut hits = [0usize; 3];
    for seed in 0..runs {
        let (config, psi) = hom_config(0.5, seed)?;
        let r = run_adaptive(&config, &psi)?;
        hits[r.outcome.expect("adaptive runs report an outcome")] += 1;
    }
    let born = [0.5, 0.0, 0.5];
    let band = 3.0 / (runs as f64).sqrt();
    let spread = hits.iter().zip(born).map(|(&h, p)| (h as f64 / runs as f64 - p).abs()).fold(0.0, f64::max);

    let (config, psi) = hom_config(0.5, 7)?;
    let local = run_adaptive(&config, &psi)?;
    let server = BobServer::bind("127.0.0.1:0", config.circuit()?)?;
    let addr = server.local_addr()?;
    let bob = std::thread::spawn(move || server.serve_one());
    let remote = connect_alice(addr, &psi, config.sigma, config.seed)?;
    bob.join().expect("server thread")?;
    let identical = remote == local;

    Ok(Verdict::new(
        deficit <= 1e-10 && spread <= band && identical,
        format!(
            "sigma=0 deficit {deficit:.1e} (limit 1e-10); outcome counts {hits:?} over {runs} runs, max |freq - p| {spread:.4} (limit {band:.4}); loopback {}",
            if identical { "identical" } else { "differs" }
        ),
    ))
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion { id: "AC1", name: "oracle-equivalence", budget: secs(120), run: oracle_equivalence },
        Criterion { id: "AC2", name: "selection-rule-symmetry", budget: secs(30), run: selection_symmetry },
        Criterion { id: "AC3", name: "trace-preservation", budget: secs(60), run: trace_preservation },
        Criterion { id: "AC4", name: "positivity", budget: secs(60), run: positivity },
        Criterion { id: "AC5", name: "monte-carlo-agreement", budget: secs(60), run: monte_carlo_agreement },
        Criterion { id: "AC6", name: "combinatorial-identities", budget: secs(30), run: combinatorial_identities },
        Criterion { id: "AC7", name: "diagonal-and-row-sum-bounds", budget: secs(120), run: diagonal_and_row_sum_bounds },
        Criterion { id: "AC8", name: "security-bound-pairs", budget: secs(300), run: security_bound_pairs },
        Criterion { id: "AC9", name: "secrecy-scaling", budget: secs(180), run: secrecy_scaling },
        Criterion { id: "AC10", name: "commutation-round-trip", budget: secs(120), run: commutation_round_trip },
        Criterion { id: "AC11", name: "fock-lift", budget: secs(30), run: lift_correctness },
        Criterion { id: "AC12", name: "adaptive-protocol", budget: secs(180), run: adaptive_protocol },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(v) => (v.pass && elapsed <= c.budget, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!pass);
        println!(
            "{} {:<5} {:<28} {:>7.2}s/{:>3}s  {detail}",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            c.budget.as_secs(),
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
