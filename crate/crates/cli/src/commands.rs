//! One function per subcommand. Each writes its CSV (or JSON report) and a
//! manifest, and maps failures onto exit codes through [`CliError`].

use std::fs;
use std::path::Path;

use cyclab::bergman::{self, default_truncation};
use cyclab::corona::{self, bezout_solve, infimum_check, infimum_grid};
use cyclab::grid::GridSpec;
use cyclab::growth::{
    check_lemma4, check_lemma5, moment_weights, parse_lambda, LambdaMajorant, LambdaSpec,
};
use cyclab::pipeline::{
    self, classify, contrast_report, keldys_entry, plan_theorem1, plan_theorem2, run_theorem1,
    run_theorem2, scan_entry, theorem2_entry, ConstantSource, Mode, PipelineRun, SolverOptions,
    TrajectoryRow,
};
use cyclab::quad::DEFAULT_REL_TOL;
use cyclab::report::{fmt_f64, Csv};
use cyclab::series::{inner_coeffs, AtomicSingularMeasure};
use cyclab::weights::{
    self, checkpoints, log_concave_envelope, make_family, parse_table, validate, weight_ladder,
    FamilySpec, WeightSequence,
};
use serde::Serialize;

use crate::error::CliError;
use crate::manifest::{manifest_path, sibling, RunManifest};
use crate::WeightArgs;

fn write(path: &Path, body: &str) -> Result<String, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, body)?;
    Ok(path.display().to_string())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<String, CliError> {
    write(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn finish(out: &Path, mut manifest: RunManifest, outputs: Vec<String>) -> Result<(), CliError> {
    manifest.outputs = outputs;
    write(&manifest_path(out), &manifest.to_json()?)?;
    Ok(())
}

pub fn load_weight(args: &WeightArgs, horizon: usize) -> Result<WeightSequence, CliError> {
    let spec: FamilySpec = args.family.parse()?;
    let table = match &spec {
        FamilySpec::Table { file } => Some(parse_table(&fs::read_to_string(file)?)?),
        _ => None,
    };
    Ok(make_family(&spec, horizon, args.unchecked, table.as_deref())?)
}

pub fn load_lambda(s: &str) -> Result<LambdaMajorant, CliError> {
    let (spec, set) = parse_lambda(s)?;
    let rows = match &spec {
        LambdaSpec::Table { file } => Some(parse_lambda_table(&fs::read_to_string(file)?)?),
        _ => None,
    };
    Ok(LambdaMajorant::build(spec, set, rows.as_deref())?)
}

/// `t,Λ` (or whitespace separated) rows; blank lines and `#` comments skipped.
fn parse_lambda_table(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let mut it = l.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty());
            let parse = |t: Option<&str>| t.and_then(|t| t.parse::<f64>().ok());
            match (parse(it.next()), parse(it.next())) {
                (Some(t), Some(v)) => Ok((t, v)),
                _ => Err(CliError::Spec(format!("lambda table row `{l}`"))),
            }
        })
        .collect()
}

fn atoms(s: &str) -> Result<AtomicSingularMeasure, CliError> {
    Ok(s.parse::<AtomicSingularMeasure>()?)
}

pub fn weights(
    args: &WeightArgs,
    horizon: usize,
    rungs: usize,
    envelope: bool,
    out: &Path,
    argv: Vec<String>,
) -> Result<(), CliError> {
    let w = load_weight(args, horizon)?;
    let mut m = RunManifest::new("weights", argv);
    m.weight = Some(w.tag().to_string());
    m.param("horizon", horizon).param("rungs", rungs).param("envelope", envelope);

    let cp = checkpoints(&w);
    let mut csv = Csv::new(&["N", "partial_theorem1", "partial_beurling"]);
    for &(n, s1, s2) in &cp.points {
        csv.row(&[n.to_string(), fmt_f64(s1), fmt_f64(s2)]);
    }
    let mut outputs = vec![write(out, csv.as_str())?];

    let ladder = weight_ladder(&w, rungs);
    let mut lcsv = Csv::new(&["j", "n", "logw"]);
    if let Ok(l) = &ladder {
        for (j, &n) in l.rungs.iter().enumerate() {
            lcsv.row(&[j.to_string(), n.to_string(), fmt_f64(w.log_weight(n))]);
        }
    }
    outputs.push(write(&sibling(out, "ladder.csv"), lcsv.as_str())?);

    if envelope {
        let env = log_concave_envelope(&w, horizon)?;
        let mut ecsv = Csv::new(&["n", "logw", "envelope"]);
        for n in 0..=horizon {
            ecsv.row(&[n.to_string(), fmt_f64(w.log_weight(n)), fmt_f64(env.log_weight(n))]);
        }
        outputs.push(write(&sibling(out, "envelope.csv"), ecsv.as_str())?);
    }

    #[derive(Serialize)]
    struct Report {
        validation: weights::ValidationReport,
        slope_theorem1: Option<f64>,
        slope_beurling: Option<f64>,
        ladder: Option<weights::Ladder>,
        ladder_error: Option<String>,
    }
    let (lad, lad_err) = match ladder {
        Ok(l) => (Some(l), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let report = Report {
        validation: validate(&w, horizon),
        slope_theorem1: cp.slope_theorem1,
        slope_beurling: cp.slope_beurling,
        ladder: lad,
        ladder_error: lad_err,
    };
    outputs.push(write_json(&sibling(out, "report.json"), &report)?);
    println!(
        "monotone={} logconcave={} checkpoints={}",
        report.validation.monotone,
        report.validation.logconcave,
        cp.points.len()
    );
    finish(out, m, outputs)
}

pub fn scan(
    args: &WeightArgs,
    inner: &str,
    degrees: &[usize],
    m: Option<usize>,
    out: &Path,
    argv: Vec<String>,
) -> Result<(), CliError> {
    if degrees.windows(2).any(|p| p[1] <= p[0]) {
        return Err(CliError::Spec("degrees must be strictly ascending".into()));
    }
    let nu = atoms(inner)?;
    let n_max = degrees.last().copied().unwrap_or(0);
    let m = m.unwrap_or_else(|| default_truncation(n_max));
    let w = load_weight(args, weights::DEFAULT_HORIZON.max(m + 1))?;
    let rows = bergman::cyclicity_scan(&w, &nu, degrees, m)?;

    let mut csv = Csv::new(&["N", "M", "dist", "dist_sq", "tail_bound", "gram_condition"]);
    for r in &rows {
        csv.row(&[
            r.n.to_string(),
            r.m.to_string(),
            fmt_f64(r.dist),
            fmt_f64(r.dist_sq),
            fmt_f64(r.tail_bound),
            fmt_f64(r.gram_condition),
        ]);
    }
    let mut man = RunManifest::new("scan", argv);
    man.weight = Some(w.tag().to_string());
    man.atoms = Some(nu.to_string());
    man.param("M", m).param(
        "degrees",
        degrees.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","),
    );
    man.tolerance("ridge", 1e-14).tolerance("ridge_condition", 1e12);
    let outputs = vec![write(out, csv.as_str())?];
    if let Some(last) = rows.last() {
        println!("N={} dist={}", last.n, fmt_f64(last.dist));
    }
    finish(out, man, outputs)
}

pub fn bezout(
    inner: &str,
    ns: &[usize],
    d: Option<usize>,
    m: Option<usize>,
    out: &Path,
    argv: Vec<String>,
) -> Result<(), CliError> {
    let nu = atoms(inner)?;
    let mut csv = Csv::new(&["n", "d", "M", "residual_l2", "f_sup", "g_sup", "corona_bound", "pass"]);
    for &n in ns {
        let d = d.unwrap_or(16usize.max(4 * n));
        let m = m.unwrap_or(16 * d);
        let sol = bezout_solve(&inner_coeffs(&nu, m), n, d, m)?;
        csv.row(&[
            n.to_string(),
            d.to_string(),
            m.to_string(),
            fmt_f64(sol.residual_l2),
            fmt_f64(sol.f_sup),
            fmt_f64(sol.g_sup),
            fmt_f64(sol.corona_bound),
            sol.pass.to_string(),
        ]);
    }
    let mut man = RunManifest::new("bezout", argv);
    man.atoms = Some(nu.to_string());
    man.tolerance("residual", corona::BEZOUT_RESIDUAL_TOL)
        .tolerance("sup_radius", corona::SUP_RADIUS)
        .tolerance("sup_rel", corona::SUP_REL);
    let outputs = vec![write(out, csv.as_str())?];
    finish(out, man, outputs)
}

pub struct VerifyArgs {
    pub lemma: u8,
    pub inner: String,
    pub n: Option<usize>,
    pub delta: Option<f64>,
    pub a: Option<f64>,
    pub c: Option<f64>,
    pub lambda: String,
}

fn need<T>(v: Option<T>, name: &str, lemma: u8) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Spec(format!("lemma {lemma} needs --{name}")))
}

pub fn verify(args: VerifyArgs, out: &Path, argv: Vec<String>) -> Result<(), CliError> {
    let mut man = RunManifest::new("verify", argv);
    man.param("lemma", args.lemma);
    #[derive(Serialize)]
    struct Wrapped<T> {
        lemma: u8,
        pass: bool,
        report: T,
    }
    let (pass, summary, written) = match args.lemma {
        3 => {
            let nu = atoms(&args.inner)?;
            let n = need(args.n, "n", 3)?;
            let grid = infimum_grid(&nu);
            let r = infimum_check(&nu, n, &grid)?;
            man.atoms = Some(nu.to_string());
            man.param("n", n);
            man.grid = Some(grid);
            let s = format!("margin={}", fmt_f64(r.margin));
            (r.pass, s, write_json(out, &Wrapped { lemma: 3, pass: r.pass, report: r.clone() })?)
        }
        4 => {
            let lam = load_lambda(&args.lambda)?;
            let delta = need(args.delta, "delta", 4)?;
            let a = need(args.a, "a", 4)?;
            let r = check_lemma4(&lam, delta, a, &GridSpec::standard())?;
            man.lambda = Some(lam.tag());
            man.param("delta", delta).param("a", a);
            man.grid = Some(r.grid.clone());
            man.tolerance("quad_rel", DEFAULT_REL_TOL);
            let pass = r.pass9 && r.pass11;
            let s = format!("margin9={} margin11={}", fmt_f64(r.margin9), fmt_f64(r.margin11));
            (pass, s, write_json(out, &Wrapped { lemma: 4, pass, report: r })?)
        }
        _ => {
            let lam = load_lambda(&args.lambda)?;
            let c = need(args.c, "c", 5)?;
            let n = need(args.n, "n", 5)?;
            let r = check_lemma5(c, n, &lam)?;
            man.lambda = Some(lam.tag());
            man.param("c", c).param("n", n);
            man.grid = Some(r.grid.clone());
            let s = format!(
                "inf_margin={} bnorm_margin={}",
                fmt_f64(r.inf_margin),
                fmt_f64(r.bnorm_margin)
            );
            (r.pass, s, write_json(out, &Wrapped { lemma: 5, pass: r.pass, report: r.clone() })?)
        }
    };
    println!("lemma {}: {} {summary}", args.lemma, if pass { "PASS" } else { "FAIL" });
    finish(out, man, vec![written])?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Margin(format!("lemma {} {summary}", args.lemma)))
    }
}

pub fn moments(lambda: &str, n_max: usize, out: &Path, argv: Vec<String>) -> Result<(), CliError> {
    let lam = load_lambda(lambda)?;
    let w = moment_weights(&lam, n_max)?;
    let mut csv = Csv::new(&["n", "logw"]);
    for n in 0..=n_max {
        csv.row(&[n.to_string(), fmt_f64(w.log_weight(n))]);
    }
    let v = validate(&w, n_max);
    println!("monotone={} logconcave={}", v.monotone, v.logconcave);
    let mut man = RunManifest::new("moments", argv);
    man.lambda = Some(lam.tag());
    man.param("n_max", n_max);
    man.tolerance("quad_rel", cyclab::growth::moments::MOMENT_REL_TOL);
    let outputs = vec![write(out, csv.as_str())?];
    finish(out, man, outputs)
}

pub struct PipelineArgs {
    pub mode: String,
    pub family: Option<String>,
    pub unchecked: bool,
    pub inner: Option<String>,
    pub lambda: Option<String>,
    pub j0: Vec<usize>,
    pub constant: Option<f64>,
    pub max_degree: usize,
    pub m: usize,
}

pub fn pipeline(args: PipelineArgs, out: &Path, argv: Vec<String>) -> Result<(), CliError> {
    let mode: Mode = args.mode.parse()?;
    let opts = SolverOptions {
        max_degree: args.max_degree,
        m: args.m,
        grid: GridSpec::standard(),
    };
    let mut man = RunManifest::new("pipeline", argv);
    man.param("mode", mode)
        .param("j0", args.j0.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(","))
        .param("max_degree", opts.max_degree)
        .param("M", opts.m);
    man.tolerance("bezout_residual", corona::BEZOUT_RESIDUAL_TOL);

    let mut results: Vec<(usize, Result<PipelineRun, pipeline::PipelineError>)> = Vec::new();
    match mode {
        Mode::Theorem1 => {
            let family = args
                .family
                .ok_or_else(|| CliError::Spec("theorem1 needs --family".into()))?;
            let inner = args
                .inner
                .ok_or_else(|| CliError::Spec("theorem1 needs --inner".into()))?;
            let nu = atoms(&inner)?;
            if nu.is_empty() {
                return Err(CliError::Spec("theorem1 needs at least one atom".into()));
            }
            let wargs = WeightArgs {
                family,
                unchecked: args.unchecked,
            };
            let w = load_weight(&wargs, weights::DEFAULT_HORIZON.max(opts.m + 1))?;
            let (a, source) = match args.constant {
                Some(a) => (a, ConstantSource::Override),
                None => (corona::a_eff_standard(&w)?.a_eff, ConstantSource::Measured),
            };
            man.weight = Some(w.tag().to_string());
            man.atoms = Some(nu.to_string());
            man.param("constant", fmt_f64(a));
            for &j0 in &args.j0 {
                let r = plan_theorem1(&w, &nu, j0, a, source).and_then(|p| run_theorem1(&p, &w, &nu, &opts));
                results.push((j0, r));
            }
        }
        Mode::Theorem2 | Mode::Theorem2Monomial => {
            let lam_s = args
                .lambda
                .ok_or_else(|| CliError::Spec(format!("{mode} needs --lambda")))?;
            let lam = load_lambda(&lam_s)?;
            let nu = atoms(args.inner.as_deref().unwrap_or("1.0@0.0"))?;
            let (b, source) = match args.constant {
                Some(b) => (b, ConstantSource::Override),
                None => (1.0, ConstantSource::Default),
            };
            man.lambda = Some(lam.tag());
            man.atoms = Some(nu.to_string());
            man.grid = Some(opts.grid.clone());
            man.param("constant", fmt_f64(b));
            for &j0 in &args.j0 {
                let r = plan_theorem2(&lam, &nu, j0, b, source, mode)
                    .and_then(|p| run_theorem2(&p, &lam, &nu, &opts));
                // mode gating and invalid constants are input errors for every j0
                if let Err(e @ (pipeline::PipelineError::ModeGate { .. } | pipeline::PipelineError::BadParameter(_))) = &r {
                    return Err(e.clone().into());
                }
                results.push((j0, r));
            }
        }
    }

    let mut csv = Csv::new(&["j0", "N", "mode", "residual", "bound", "constant_used"]);
    let mut runs = Vec::new();
    let mut first_err = None;
    for (j0, r) in results {
        match r {
            Ok(run) => {
                let row = TrajectoryRow::from(&run);
                csv.row(&[
                    row.j0.to_string(),
                    row.n_blocks.to_string(),
                    row.mode.to_string(),
                    fmt_f64(row.residual),
                    fmt_f64(row.bound),
                    fmt_f64(row.constant_used),
                ]);
                runs.push(run);
            }
            Err(e) => {
                eprintln!("j0={j0}: {e}");
                first_err.get_or_insert(e);
            }
        }
    }
    let traj: Vec<f64> = runs.iter().map(|r| r.residual).collect();
    let class = classify(&traj);
    println!("classification: {class}");
    let outputs = vec![
        write(out, csv.as_str())?,
        write_json(&sibling(out, "runs.json"), &runs)?,
    ];
    finish(out, man, outputs)?;
    match first_err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

/// The standard contrast configurations.
pub fn contrast(suite: &str, j0s: &[usize], out: &Path, argv: Vec<String>) -> Result<(), CliError> {
    let (do_scan, do_t2) = match suite {
        "scan" => (true, false),
        "theorem2" => (false, true),
        "all" => (true, true),
        other => return Err(CliError::Spec(format!("suite '{other}'"))),
    };
    let unit = AtomicSingularMeasure::point_mass(1.0)?;
    let mut entries = Vec::new();
    let mut keldys = Vec::new();
    let mut man = RunManifest::new("contrast", argv);
    man.atoms = Some(unit.to_string());
    man.param("suite", suite);
    if do_scan {
        let m = 4096;
        let sqrt = make_family(&FamilySpec::Stretched { c: 1.0, beta: 0.5 }, m + 1, false, None)?;
        let poly = make_family(&FamilySpec::Power { alpha: 2.0 }, m + 1, false, None)?;
        entries.push(scan_entry(sqrt.tag(), &sqrt, &unit, &[16, 32, 64, 128, 256], m)?);
        entries.push(scan_entry(poly.tag(), &poly, &unit, &[128, 256, 512], m)?);
        man.param("scan_M", m);
    }
    if do_t2 {
        let opts = SolverOptions::default();
        for spec in ["power,alpha=1", "power,alpha=0.5"] {
            let lam = load_lambda(spec)?;
            entries.push(theorem2_entry(
                &lam.tag(),
                &lam,
                &unit,
                j0s,
                1.0,
                ConstantSource::Default,
                &opts,
            ));
            keldys.push(keldys_entry(&lam.tag(), &lam));
        }
        man.grid = Some(opts.grid);
        man.param("j0", j0s.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(","));
    }
    if entries.len() < 2 {
        return Err(CliError::Spec("contrast needs at least two configurations".into()));
    }
    let report = contrast_report(entries, keldys)?;
    let mut csv = Csv::new(&["label", "x", "value", "partial_sum", "classification"]);
    for e in &report.entries {
        let label = e.label.replace(',', ";");
        for (i, &x) in e.xs.iter().enumerate() {
            csv.row(&[
                label.clone(),
                x.to_string(),
                fmt_f64(e.trajectory[i]),
                fmt_f64(e.partial_sums.get(i).copied().unwrap_or(f64::NAN)),
                e.classification.to_string(),
            ]);
        }
        println!("{}: {}", e.label, e.classification);
    }
    for k in &report.keldys {
        let label = format!("keldys:{}", k.label.replace(',', ";"));
        csv.row(&[
            label,
            "0".into(),
            fmt_f64(k.log_abs_f0.unwrap_or(f64::NAN)),
            fmt_f64(f64::NAN),
            if k.converged { "converged".into() } else { "divergent".into() },
        ]);
        println!("keldys {}: {}", k.label, k.note);
    }
    let outputs = vec![
        write(out, csv.as_str())?,
        write_json(&sibling(out, "report.json"), &report)?,
    ];
    finish(out, man, outputs)
}
