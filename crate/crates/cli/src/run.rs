//! Subcommand implementations and report emission.

use std::path::{Path, PathBuf};

use nilavg::couplings::{
    build_window, canon_rearrange_check, cesaro_last, cond_exp_identity_check, iota, pairing,
    rearrange_indices, CondExpReport, EmpiricalCoupling, IndexWindow, Pairing, SemidirectElement,
};
use nilavg::dynamics::{
    character_oracle, convergence_report, l2_norm_sq, lambda_exact, AverageReport, CharacterOracle,
    DynSystem, Estimator, Observable,
};
use nilavg::exact::{self, ratio, Rational};
use nilavg::nilseq::IntMatrix;
use nilavg::reduction::{
    alpha_shift, bracket, complexity, difference, index_shift, ComplexityOutcome, ReductionTrace,
    SearchOptions,
};
use nilavg::{GSystem, NilSeq};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Command, CouplingConfig, ExperimentConfig, Mode, SearchConfig, VerifyConfig};
use crate::{random, CliError, EXIT_EXCEEDED, EXIT_OK, EXIT_VIOLATION, OUT_DIR_ENV};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub max_depth: Option<usize>,
    pub mode: Option<Mode>,
    pub format: Option<Format>,
}

/// Result of one invocation: exit code, a one-line summary, written files.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

fn out_dir(opts: &Options, cfg: &ExperimentConfig) -> PathBuf {
    opts.out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// Runs `command` (or the config's own `command`) with `opts`.
pub fn run(command: Option<Command>, opts: &Options) -> Result<Outcome, CliError> {
    let cfg = ExperimentConfig::from_path(&opts.config)?;
    let command = match (command, cfg.command) {
        (Some(c), Some(k)) if c != k => {
            return Err(CliError::config(format!(
                "config is for {k:?}, invoked as {c:?}"
            )))
        }
        (Some(c), _) | (None, Some(c)) => c,
        (None, None) => return Err(CliError::config("config names no command")),
    };
    let format = opts.format;
    if format == Some(Format::Svg) && command != Command::Average {
        return Err(CliError::config(
            "svg output is only available for averages",
        ));
    }
    if format == Some(Format::Csv) && command != Command::Average {
        return Err(CliError::config(
            "csv output is only available for averages",
        ));
    }
    let dir = out_dir(opts, &cfg);
    match command {
        Command::Complexity => run_complexity(&cfg, opts, &dir),
        Command::Average => run_average(&cfg, opts, &dir),
        Command::Couple => run_couple(&cfg, &dir),
        Command::Verify => run_verify(&cfg, opts, &dir),
    }
}

// ---------------------------------------------------------------- complexity

#[derive(Serialize)]
struct ComplexityOutput<'a> {
    schema: &'static str,
    name: &'a str,
    system: Vec<String>,
    max_depth: usize,
    fixed_initial_order: bool,
    prune_constant_last: bool,
    status: &'static str,
    value: Option<usize>,
    trace: Option<ReductionTrace>,
}

fn run_complexity(cfg: &ExperimentConfig, opts: &Options, dir: &Path) -> Result<Outcome, CliError> {
    let gsys = cfg.gsystem()?;
    let search = cfg.search.clone().unwrap_or_default();
    let SearchConfig {
        max_depth,
        fixed_initial_order,
        prune_constant_last,
    } = search;
    let max_depth = opts.max_depth.unwrap_or(max_depth);
    let outcome = complexity(
        &gsys,
        max_depth,
        &SearchOptions {
            fixed_initial_order,
            prune_constant_last,
        },
    );
    let (status, value, trace, code) = match outcome {
        ComplexityOutcome::Found { value, trace } => {
            // A witness that does not replay would be a bug in the search.
            let end = trace.replay()?;
            if !nilavg::reduction::is_trivial(&end) {
                return Ok(Outcome {
                    code: EXIT_VIOLATION,
                    summary: format!("{}: witness does not end in a trivial system", cfg.name),
                    files: Vec::new(),
                });
            }
            ("found", Some(value), Some(trace), EXIT_OK)
        }
        ComplexityOutcome::Exceeded { .. } => ("exceeded", None, None, EXIT_EXCEEDED),
    };
    let out = ComplexityOutput {
        schema: "nilavg.complexity/1",
        name: &cfg.name,
        system: gsys.to_strings(),
        max_depth,
        fixed_initial_order,
        prune_constant_last,
        status,
        value,
        trace,
    };
    let file = write(
        dir,
        &format!("{}.complexity.json", cfg.name),
        &to_json(&out),
    )?;
    let summary = match value {
        Some(v) => format!("{}: complexity {v}", cfg.name),
        None => format!("{}: complexity exceeds {max_depth}", cfg.name),
    };
    Ok(Outcome {
        code,
        summary,
        files: vec![file],
    })
}

// ------------------------------------------------------------------- average

#[derive(Serialize)]
struct AverageOutput<'a> {
    schema: &'static str,
    name: &'a str,
    system: Vec<String>,
    report: &'a AverageReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<CharacterOracle>,
}

/// The report for a config, honouring option overrides.
pub fn average_report(
    cfg: &ExperimentConfig,
    opts: &Options,
) -> Result<(AverageReport, Option<CharacterOracle>), CliError> {
    let gsys = cfg.gsystem()?;
    let sys = cfg.dynamics()?;
    let avg = cfg
        .average
        .as_ref()
        .ok_or_else(|| CliError::config("config has no average section"))?;
    let mode = opts.mode.or(avg.mode).unwrap_or(if sys.is_finite() {
        Mode::Exact
    } else {
        Mode::Sampled
    });
    let estimator = match mode {
        Mode::Exact if !sys.is_finite() => {
            return Err(CliError::config(
                "exact averages need a finite system; use --sampled on the torus",
            ))
        }
        Mode::Exact => Estimator::Exact,
        Mode::Sampled => Estimator::MonteCarlo {
            samples: avg.samples,
            seed: opts.seed.unwrap_or(avg.seed),
        },
    };
    let report = convergence_report(
        sys,
        &gsys,
        &cfg.observables,
        &avg.grid,
        avg.window,
        avg.epsilon,
        &estimator,
    )?;
    let oracle = match sys {
        DynSystem::TorusRotation { rotation }
            if gsys.is_abelian_first_row()
                && cfg.observables.iter().all(Observable::is_character) =>
        {
            Some(character_oracle(&cfg.observables, &gsys, rotation)?)
        }
        _ => None,
    };
    Ok((report, oracle))
}

fn run_average(cfg: &ExperimentConfig, opts: &Options, dir: &Path) -> Result<Outcome, CliError> {
    let (report, oracle) = average_report(cfg, opts)?;
    let format = opts.format.unwrap_or(Format::Csv);
    let body = match format {
        Format::Csv => report.to_csv(),
        Format::Svg => report.to_svg(),
        Format::Json => to_json(&AverageOutput {
            schema: "nilavg.average/1",
            name: &cfg.name,
            system: cfg.gsystem()?.to_strings(),
            report: &report,
            oracle,
        }),
    };
    let file = write(
        dir,
        &format!("{}.average.{}", cfg.name, format.extension()),
        &body,
    )?;
    let stable = report.rows.iter().filter(|r| r.below_epsilon).count();
    Ok(Outcome {
        code: EXIT_OK,
        summary: format!(
            "{}: {} grid points, {} below epsilon ({})",
            cfg.name,
            report.rows.len(),
            stable,
            report.estimator.label()
        ),
        files: vec![file],
    })
}

// -------------------------------------------------------------------- couple

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagonalResult {
    pub element: String,
    pub invariant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingResult {
    #[serde(rename = "N")]
    pub n: u64,
    pub periodized: bool,
    pub atoms: usize,
    pub x_marginal_is_mu: bool,
    pub diagonal: Vec<DiagonalResult>,
    #[serde(with = "exact::text")]
    pub alpha_tv: Rational,
    #[serde(with = "exact::text")]
    pub alpha_bound: Rational,
    pub alpha_ok: bool,
    pub marginal_s_checked: usize,
    pub marginal_s_invariant: bool,
    pub pairing: Pairing,
    pub cond_exp: CondExpReport,
}

impl CouplingResult {
    pub fn passed(&self) -> bool {
        self.x_marginal_is_mu
            && self.diagonal.iter().all(|d| d.invariant)
            && self.alpha_ok
            && self.marginal_s_invariant
            && self.pairing.agrees()
            && self.cond_exp.holds()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoupleReport {
    pub schema: &'static str,
    pub name: String,
    pub system: Vec<String>,
    pub window_core: usize,
    pub window_size: usize,
    pub closures: Vec<nilavg::couplings::ClosureNote>,
    pub results: Vec<CouplingResult>,
    pub passed: bool,
}

fn coupling_setup(
    cfg: &ExperimentConfig,
) -> Result<(GSystem, DynSystem, CouplingConfig, Vec<IntMatrix>), CliError> {
    let gsys = cfg.gsystem()?;
    let sys = cfg.dynamics()?.clone();
    if !sys.is_finite() {
        return Err(CliError::config("couplings need a finite system"));
    }
    let cc = cfg
        .coupling
        .clone()
        .ok_or_else(|| CliError::config("config has no coupling section"))?;
    if cfg.observables.len() != gsys.len() {
        return Err(CliError::config(format!(
            "{} observables for {} sequences",
            cfg.observables.len(),
            gsys.len()
        )));
    }
    let translations = cc
        .translations
        .iter()
        .map(|e| cfg.group.element(e))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((gsys, sys, cc, translations))
}

/// The window of a coupling config with its requested closures.
pub fn coupling_window(
    gsys: &GSystem,
    cc: &CouplingConfig,
    translations: &[IntMatrix],
) -> Result<IndexWindow, CliError> {
    let (lo, hi) = cc.n_range;
    let mut w = build_window(gsys, lo..=hi, &[])?;
    let core: Vec<NilSeq> = w.core().to_vec();
    if cc.closures.alpha {
        w.close_under(&SemidirectElement::alpha(gsys.dim(), 1))?;
    }
    if cc.closures.translations {
        for g in translations {
            w.close_under(&SemidirectElement::translation(&iota(g))?)?;
        }
    }
    if cc.closures.elements {
        for r in &core {
            w.close_under(&SemidirectElement::translation(r)?)?;
        }
    }
    Ok(w)
}

/// Builds the coupling for every `N` of the grid and runs the suite.
pub fn couple_suite(
    cfg: &ExperimentConfig,
) -> Result<(CoupleReport, Vec<EmpiricalCoupling>), CliError> {
    let (gsys, sys, cc, translations) = coupling_setup(cfg)?;
    let w = coupling_window(&gsys, &cc, &translations)?;
    let k = gsys.len();
    let fs = &cfg.observables[..k - 1];
    let f_k = &cfg.observables[k - 1];
    let mut results = Vec::new();
    let mut couplings = Vec::new();
    for &n in &cc.grid {
        let last = if cc.cesaro_last {
            cesaro_last(&sys, &gsys, fs, &cc.last, n)?
        } else {
            cc.last.clone()
        };
        let c = EmpiricalCoupling::new(&sys, fs, &last, &w, n)?;
        let count = sys.state_count().expect("finite");
        let mu = ratio(1, count as i64);
        let diagonal = translations
            .iter()
            .map(|g| {
                Ok(DiagonalResult {
                    element: g.to_string(),
                    invariant: c.check_diag_invariance(g)?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let alpha_tv = c.check_alpha_invariance()?;
        let alpha_bound = ratio(2, n as i64);
        let alpha_ok = alpha_tv <= alpha_bound && (!c.is_periodized() || alpha_tv.is_zero());
        let mut marginal_s_invariant = true;
        for r in w.core() {
            marginal_s_invariant &= c.check_marginal_s_invariance(r)?;
        }
        results.push(CouplingResult {
            n,
            periodized: c.is_periodized(),
            atoms: c.atom_count(),
            x_marginal_is_mu: c.x_marginal().iter().all(|m| *m == mu),
            diagonal,
            alpha_tv,
            alpha_bound,
            alpha_ok,
            marginal_s_checked: w.core_len(),
            marginal_s_invariant,
            pairing: pairing(&c, f_k, &gsys)?,
            cond_exp: cond_exp_identity_check(&c, &gsys, cc.n_avg)?,
        });
        couplings.push(c);
    }
    let passed = results.iter().all(CouplingResult::passed);
    Ok((
        CoupleReport {
            schema: "nilavg.couple/1",
            name: cfg.name.clone(),
            system: gsys.to_strings(),
            window_core: w.core_len(),
            window_size: w.len(),
            closures: w.closure_notes(),
            results,
            passed,
        },
        couplings,
    ))
}

fn run_couple(cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome, CliError> {
    let (report, couplings) = couple_suite(cfg)?;
    let mut files = vec![write(
        dir,
        &format!("{}.couple.json", cfg.name),
        &to_json(&report),
    )?];
    if cfg.coupling.as_ref().is_some_and(|c| c.dump) {
        for c in &couplings {
            let mut body = c.to_json();
            body.push('\n');
            files.push(write(
                dir,
                &format!("{}.coupling-N{}.json", cfg.name, c.n_terms()),
                &body,
            )?);
        }
    }
    let failed: Vec<u64> = report
        .results
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.n)
        .collect();
    Ok(Outcome {
        code: if report.passed {
            EXIT_OK
        } else {
            EXIT_VIOLATION
        },
        summary: if report.passed {
            format!(
                "{}: coupling suite passed at {} values of N",
                cfg.name,
                report.results.len()
            )
        } else {
            format!("{}: coupling suite failed at N = {failed:?}", cfg.name)
        },
        files,
    })
}

// -------------------------------------------------------------------- verify

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Battery {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

impl Battery {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            cases: 0,
            failures: 0,
            first_failure: None,
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(what());
            }
        }
    }
}

/// `A A⁻¹ = I`, associativity and the shift homomorphisms.
pub fn algebra_battery(rng: &mut ChaCha8Rng, cases: usize) -> Battery {
    let mut b = Battery::new("algebra");
    for _ in 0..cases {
        let d = rng.gen_range(2..=5);
        let level = rng.gen_range(0..=1);
        let [x, y, z] = [0, 1, 2].map(|_| random::nilseq(rng, d, level, 3));
        let k = rng.gen_range(-3i64..=3);
        let e = NilSeq::identity(d, level);
        let ok = &x * &x.inverse() == e
            && &(&x * &y) * &z == &x * &(&y * &z)
            && index_shift(&(&x * &y), k) == &index_shift(&x, k) * &index_shift(&y, k)
            && alpha_shift(&(&x * &y), k) == &alpha_shift(&x, k) * &alpha_shift(&y, k);
        b.record(ok, || format!("{x} / {y} / {z}, shift {k}"));
    }
    b
}

/// `bracket(p, e) = difference(p)` and `bracket(p, p) = ι p`.
pub fn bracket_battery(rng: &mut ChaCha8Rng, cases: usize) -> Battery {
    let mut b = Battery::new("bracket");
    for i in 0..cases {
        let p = random::group_sequence(rng, i, 3);
        let e = NilSeq::identity(p.dim(), 0);
        let ok = bracket(&p, &e, 1).ok() == difference(&p, 1).ok()
            && bracket(&p, &p, 1).ok() == Some(p.lift());
        b.record(ok, || p.to_string());
    }
    b
}

/// Rearrangement indices agree, and so do the coordinates they read.
pub fn rearrange_battery(rng: &mut ChaCha8Rng, cases: usize) -> Battery {
    let mut b = Battery::new("rearrangement");
    for i in 0..cases {
        let heis = i % 2 == 1;
        let draw = |rng: &mut ChaCha8Rng| {
            if heis {
                random::heisenberg(rng, 2)
            } else {
                random::first_row(rng, 1, 3)
            }
        };
        let r = draw(rng);
        let p = draw(rng);
        let n = rng.gen_range(-6i64..=6);
        let ok = match rearrange_indices(&r, &p, n) {
            Ok((lhs, rhs)) => {
                let mut w = IndexWindow::new(r.dim());
                let inserted = w.insert_core(lhs).and_then(|_| w.insert_core(rhs));
                let y: Vec<Rational> = (0..w.len())
                    .map(|_| ratio(rng.gen_range(-3..=3), 3))
                    .collect();
                inserted.is_ok() && canon_rearrange_check(&r, &p, n, &w, &y).unwrap_or(false)
            }
            Err(_) => false,
        };
        b.record(ok, || format!("r = {r}, p = {p}, n = {n}"));
    }
    b
}

fn random_table(rng: &mut ChaCha8Rng, len: usize) -> Vec<Rational> {
    (0..len)
        .map(|_| ratio(rng.gen_range(-4..=4), rng.gen_range(4..=6)))
        .collect()
}

/// Contraction in the last slot and multilinearity of `Λ_N` on `sys`.
pub fn averages_battery(
    rng: &mut ChaCha8Rng,
    cases: usize,
    sys: &DynSystem,
    gsys: &GSystem,
) -> Result<Battery, CliError> {
    let mut b = Battery::new("contraction-multilinearity");
    let count = sys.state_count().expect("finite");
    let k = gsys.len();
    for _ in 0..cases {
        let n = rng.gen_range(1..=12u64);
        let mut fs: Vec<Observable> = (0..k)
            .map(|_| Observable::tabulated(random_table(rng, count)))
            .collect();
        let f = random_table(rng, count);
        let f2 = random_table(rng, count);
        fs[k - 1] = Observable::tabulated(f.clone());
        let a = lambda_exact(sys, gsys, &fs, n)?;
        fs[k - 1] = Observable::tabulated(f2.clone());
        let a2 = lambda_exact(sys, gsys, &fs, n)?;
        let diff = |u: &[Rational], v: &[Rational]| -> Vec<Rational> {
            u.iter().zip(v).map(|(x, y)| x - y).collect()
        };
        let contraction = l2_norm_sq(&diff(&a, &a2)) <= l2_norm_sq(&diff(&f, &f2));

        let slot = rng.gen_range(0..k);
        let c = ratio(rng.gen_range(-3..=3), rng.gen_range(1..=3));
        let g = random_table(rng, count);
        let h = random_table(rng, count);
        let mix: Vec<Rational> = g.iter().zip(&h).map(|(x, y)| &c * x + y).collect();
        let mut eval = |t: Vec<Rational>| {
            fs[slot] = Observable::tabulated(t);
            lambda_exact(sys, gsys, &fs, n)
        };
        let lhs = eval(mix)?;
        let lg = eval(g)?;
        let lh = eval(h)?;
        let linear = lhs
            .iter()
            .zip(lg.iter().zip(&lh))
            .all(|(l, (x, y))| *l == &c * x + y);
        b.record(contraction && linear, || format!("N = {n}, slot {slot}"));
    }
    Ok(b)
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    schema: &'static str,
    name: &'a str,
    seed: u64,
    batteries: &'a [Battery],
    #[serde(skip_serializing_if = "Option::is_none")]
    coupling: Option<CoupleReport>,
    passed: bool,
}

fn run_verify(cfg: &ExperimentConfig, opts: &Options, dir: &Path) -> Result<Outcome, CliError> {
    let VerifyConfig { cases, seed } = cfg.verify.clone().unwrap_or_default();
    let seed = opts.seed.unwrap_or(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut batteries = vec![
        algebra_battery(&mut rng, cases),
        bracket_battery(&mut rng, cases),
        rearrange_battery(&mut rng, cases),
    ];
    let gsys = cfg.gsystem()?;
    if let Some(sys) = cfg.dynamics.as_ref().filter(|s| s.is_finite()) {
        sys.validate()?;
        batteries.push(averages_battery(&mut rng, cases.min(50), sys, &gsys)?);
    }
    let coupling = if cfg.coupling.is_some() {
        Some(couple_suite(cfg)?.0)
    } else {
        None
    };
    let passed =
        batteries.iter().all(|b| b.failures == 0) && coupling.as_ref().is_none_or(|c| c.passed);
    let out = VerifyOutput {
        schema: "nilavg.verify/1",
        name: &cfg.name,
        seed,
        batteries: &batteries,
        coupling,
        passed,
    };
    let file = write(dir, &format!("{}.verify.json", cfg.name), &to_json(&out))?;
    let total: usize = batteries.iter().map(|b| b.cases).sum();
    let failures: usize = batteries.iter().map(|b| b.failures).sum();
    Ok(Outcome {
        code: if passed { EXIT_OK } else { EXIT_VIOLATION },
        summary: format!("{}: {total} cases, {failures} failures", cfg.name),
        files: vec![file],
    })
}
