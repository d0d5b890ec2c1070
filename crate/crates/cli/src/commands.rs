use std::io::Read;

use fraclrd::analytic::{
    delta_reference_bound, fnbn_variance, fnbp_mean, fnbp_variance, fpn_variance, fpp_mean, fpp_variance,
    theoretical_exponent, FnbpParams, FppParams, GammaParams, Noise, ProcessKind,
};
use fraclrd::estimate::{
    analytic_curve, asymptotic_curve, default_t_min, delta_analytic, delta_empirical, fit_power_law, mc_correlation,
    CorrPoint, CorrelationCurve, CorrelationModel, McOptions, Source,
};
use fraclrd::sim::{run_replications, sample_process_path, PathSpec, ProcessModel};
use fraclrd::specfun::QuadConfig;

use crate::args::{ClassifyArgs, DeltaArgs, Mode, Process, RunArgs};
use crate::grid::{parse_grid, parse_int_list};
use crate::output::{fmt_f64, Cell, Meta, Table};
use crate::CliError;

fn text(k: &str, v: impl Into<String>) -> (String, Cell) {
    (k.to_string(), Cell::Text(v.into()))
}

fn num(k: &str, v: f64) -> (String, Cell) {
    text(k, fmt_f64(v))
}

fn process(args: &RunArgs) -> Result<Process, CliError> {
    args.process.ok_or_else(|| CliError::Validation("--process is required".into()))
}

fn beta(args: &RunArgs) -> Result<f64, CliError> {
    args.beta.ok_or_else(|| CliError::Validation("--beta is required for this process".into()))
}

fn times(args: &RunArgs) -> Result<Vec<f64>, CliError> {
    let spec = args.t.as_deref().ok_or_else(|| CliError::Validation("--t (or --t-grid) is required".into()))?;
    parse_grid(spec).map_err(CliError::Validation)
}

fn s_arg(args: &RunArgs) -> Result<f64, CliError> {
    args.s.ok_or_else(|| CliError::Validation("--s is required".into()))
}

fn quad(args: &RunArgs) -> Result<QuadConfig, CliError> {
    let d = QuadConfig::default();
    Ok(QuadConfig::new(args.rel_tol, d.abs_tol, d.max_depth)?)
}

/// Parameter echo; never includes the thread count, which must not change output.
fn meta(command: &str, args: &RunArgs, with_s: bool, with_sim: bool) -> Meta {
    let mut m = vec![text("command", command)];
    if let Some(p) = args.process {
        m.push(text("process", p.name()));
        if p.uses_beta() {
            if let Some(b) = args.beta {
                m.push(num("beta", b));
            }
        }
        if p.uses_lambda() {
            m.push(num("lambda", args.lambda));
        }
        if p.uses_gamma() {
            m.push(num("alpha", args.alpha));
            m.push(num("p", args.p));
        }
        if p.is_noise() {
            m.push(num("delta", args.delta));
        }
    }
    if with_s {
        if let Some(s) = args.s {
            m.push(num("s", s));
        }
    }
    if let Some(t) = &args.t {
        m.push(text("t", t.clone()));
    }
    if with_s {
        m.push(text("mode", args.mode.name()));
        m.push(num("rel_tol", args.rel_tol));
    }
    if with_sim {
        m.push(text("reps", args.reps.to_string()));
        m.push(text("seed", args.seed.to_string()));
        if let Some(step) = args.stable_step {
            m.push(num("stable_step", step));
        }
    }
    m
}

fn fnbp(args: &RunArgs) -> Result<FnbpParams, CliError> {
    Ok(FnbpParams::new(beta(args)?, args.lambda, args.alpha, args.p)?)
}

fn correlation_model(args: &RunArgs) -> Result<CorrelationModel, CliError> {
    Ok(match process(args)? {
        Process::Fpp => CorrelationModel::Fpp(FppParams::new(beta(args)?, args.lambda)?),
        Process::Fpn => CorrelationModel::Fpn(Noise::new(FppParams::new(beta(args)?, args.lambda)?, args.delta)?),
        Process::Fnbp => CorrelationModel::Fnbp(fnbp(args)?),
        Process::Fnbn => CorrelationModel::Fnbn(Noise::new(fnbp(args)?, args.delta)?),
        other => {
            return Err(CliError::Validation(format!(
                "process '{}' has no correlation model; use fpp, fpn, fnbp or fnbn",
                other.name()
            )))
        }
    })
}

fn mc_options(args: &RunArgs) -> McOptions {
    McOptions::new(args.reps, args.seed).threads(args.threads).stable_step(args.stable_step)
}

pub fn moments(args: &RunArgs) -> Result<Table, CliError> {
    let grid = times(args)?;
    let p = process(args)?;
    let mut table = Table::new(meta("moments", args, false, false), vec!["t", "mean", "variance"]);
    for &t in &grid {
        let (mean, var) = match p {
            Process::Fpp => {
                let f = FppParams::new(beta(args)?, args.lambda)?;
                (fpp_mean(&f, t)?, fpp_variance(&f, t)?)
            }
            Process::Fpn => {
                let n = Noise::new(FppParams::new(beta(args)?, args.lambda)?, args.delta)?;
                (fpp_mean(&n.base, t + n.delta)? - fpp_mean(&n.base, t)?, fpn_variance(&n, t)?)
            }
            Process::Fnbp => {
                let f = fnbp(args)?;
                (fnbp_mean(&f, t)?, fnbp_variance(&f, t)?)
            }
            Process::Fnbn => {
                let n = Noise::new(fnbp(args)?, args.delta)?;
                let lower = if t == 0.0 { 0.0 } else { fnbp_mean(&n.base, t)? };
                (fnbp_mean(&n.base, t + n.delta)? - lower, fnbn_variance(&n, t, &quad(args)?)?)
            }
            other => {
                return Err(CliError::Validation(format!(
                    "moments supports fpp, fpn, fnbp and fnbn, not '{}'",
                    other.name()
                )))
            }
        };
        table.push(vec![t.into(), mean.into(), var.into()]);
    }
    Ok(table)
}

fn build_curve(args: &RunArgs) -> Result<(CorrelationModel, CorrelationCurve), CliError> {
    let model = correlation_model(args)?;
    let s = s_arg(args)?;
    let grid = times(args)?;
    let cfg = quad(args)?;
    let curve = match args.mode {
        Mode::Analytic => analytic_curve(&model, s, &grid, &cfg)?,
        Mode::Asymptotic => asymptotic_curve(&model, s, &grid, &cfg)?,
        Mode::Empirical => mc_correlation(model.sim_model(), s, &grid, model.delta(), &mc_options(args))?,
    };
    Ok((model, curve))
}

fn curve_table(meta: Meta, curve: &CorrelationCurve) -> Table {
    let empirical = curve.source == Source::Empirical;
    let cols = if empirical { vec!["t", "corr", "std_error"] } else { vec!["t", "corr"] };
    let mut table = Table::new(meta, cols);
    for p in &curve.points {
        let mut row = vec![p.t.into(), p.corr.into()];
        if empirical {
            row.push(p.std_error.into());
        }
        table.push(row);
    }
    table
}

pub fn corr(args: &RunArgs) -> Result<Table, CliError> {
    let (_, curve) = build_curve(args)?;
    let with_sim = args.mode == Mode::Empirical;
    Ok(curve_table(meta("corr", args, true, with_sim), &curve))
}

/// A curve read back from `corr` output together with its parameter echo.
struct ParsedCurve {
    meta: Meta,
    curve: CorrelationCurve,
}

fn meta_value<'a>(meta: &'a Meta, key: &str) -> Option<&'a str> {
    meta.iter().find(|(k, _)| k == key).and_then(|(_, v)| match v {
        Cell::Text(s) => Some(s.as_str()),
        _ => None,
    })
}

fn parse_curve(raw: &str) -> Result<ParsedCurve, CliError> {
    let bad = |msg: String| CliError::Validation(format!("cannot read curve: {msg}"));
    let mut meta = Meta::new();
    let mut points = Vec::new();
    if raw.trim_start().starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(raw).map_err(|e| bad(e.to_string()))?;
        if let Some(obj) = v["meta"].as_object() {
            for (k, val) in obj {
                let s = match val {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                meta.push(text(k, s));
            }
        }
        for row in v["data"].as_array().ok_or_else(|| bad("missing data array".into()))? {
            let t = row["t"].as_f64().ok_or_else(|| bad("row without t".into()))?;
            let corr = row["corr"].as_f64().ok_or_else(|| bad("row without corr".into()))?;
            points.push(CorrPoint { t, corr, std_error: row["std_error"].as_f64() });
        }
    } else {
        let mut header: Option<Vec<String>> = None;
        for line in raw.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(c) = line.strip_prefix('#') {
                if let Some((k, v)) = c.trim().split_once('=') {
                    meta.push(text(k.trim(), v.trim()));
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            match &header {
                None => header = Some(fields.iter().map(|s| s.to_string()).collect()),
                Some(h) => {
                    let col = |name: &str| h.iter().position(|c| c == name);
                    let (ti, ci) = (col("t").ok_or_else(|| bad("no t column".into()))?, col("corr").ok_or_else(|| bad("no corr column".into()))?);
                    let parse = |i: usize| -> Result<Option<f64>, CliError> {
                        match fields.get(i).copied() {
                            None | Some("") => Ok(None),
                            Some(x) => x.parse::<f64>().map(Some).map_err(|_| bad(format!("'{x}' is not a number"))),
                        }
                    };
                    let t = parse(ti)?.ok_or_else(|| bad("empty t".into()))?;
                    let corr = parse(ci)?.ok_or_else(|| bad("empty corr".into()))?;
                    let std_error = match col("std_error") {
                        Some(i) => parse(i)?,
                        None => None,
                    };
                    points.push(CorrPoint { t, corr, std_error });
                }
            }
        }
    }
    let f = |k: &str| meta_value(&meta, k).and_then(|v| v.parse::<f64>().ok());
    let s = f("s").unwrap_or(0.0);
    let delta = match meta_value(&meta, "process") {
        Some("fpn") | Some("fnbn") => f("delta"),
        _ => None,
    };
    let source = if meta_value(&meta, "mode") == Some("empirical") || points.iter().any(|p| p.std_error.is_some()) {
        Source::Empirical
    } else {
        Source::Analytic
    };
    Ok(ParsedCurve { curve: CorrelationCurve { s, delta, points, source }, meta })
}

fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Io(format!("reading stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("reading {path}: {e}")))
    }
}

pub fn classify(args: &ClassifyArgs) -> Result<Table, CliError> {
    let (mut meta, curve, theory) = match &args.curve {
        Some(path) => {
            let parsed = parse_curve(&read_input(path)?)?;
            let kind = match meta_value(&parsed.meta, "process") {
                Some("fpp") => Some(ProcessKind::Fpp),
                Some("fpn") => Some(ProcessKind::Fpn),
                Some("fnbp") => Some(ProcessKind::Fnbp),
                Some("fnbn") => Some(ProcessKind::Fnbn),
                _ => None,
            };
            let b = meta_value(&parsed.meta, "beta").and_then(|v| v.parse::<f64>().ok());
            let theory = kind.zip(b).map(|(k, b)| theoretical_exponent(k, b));
            let mut meta = parsed.meta;
            if let Some(first) = meta.iter_mut().find(|(k, _)| k == "command") {
                first.1 = Cell::Text("classify".into());
            }
            (meta, parsed.curve, theory)
        }
        None => {
            let (model, curve) = build_curve(&args.run)?;
            let with_sim = args.run.mode == Mode::Empirical;
            (meta("classify", &args.run, true, with_sim), curve, Some(model.theoretical_exponent()))
        }
    };
    let t_min = args.t_min.unwrap_or_else(|| default_t_min(curve.s, curve.delta));
    meta.push(num("t_min", t_min));
    let fit = fit_power_law(&curve, t_min)?;
    let mut table = Table::new(
        meta,
        vec!["d_hat", "c_hat", "r_squared", "label", "theoretical_exponent", "abs_deviation", "d_std_error", "points_used"],
    );
    table.push(vec![
        fit.d_hat.into(),
        fit.c_hat.into(),
        fit.r_squared.into(),
        fit.label.to_string().into(),
        theory.into(),
        theory.map(|d| (fit.d_hat - d).abs()).into(),
        fit.d_std_error.into(),
        (fit.points_used as u64).into(),
    ]);
    Ok(table)
}

pub fn delta(args: &DeltaArgs) -> Result<Table, CliError> {
    let run = &args.run;
    if let Some(p) = run.process {
        if p != Process::Fpp {
            return Err(CliError::Validation("delta is defined for --process fpp only".into()));
        }
    }
    let params = FppParams::new(beta(run)?, run.lambda)?;
    let ms = parse_int_list(&args.m).map_err(|e| CliError::Validation(format!("--m: {e}")))?;
    if ms.contains(&0) {
        return Err(CliError::Validation("--m values must be >= 1".into()));
    }
    if args.n < 1 {
        return Err(CliError::Validation("--n must be >= 1".into()));
    }
    let mut meta = vec![text("command", "delta"), text("process", "fpp"), num("beta", params.beta), num("lambda", params.lambda)];
    meta.push(text("n", args.n.to_string()));
    meta.push(text("m", args.m.clone()));
    if args.empirical {
        meta.push(text("reps", run.reps.to_string()));
        meta.push(text("seed", run.seed.to_string()));
        if let Some(step) = run.stable_step {
            meta.push(num("stable_step", step));
        }
    }
    let exact = delta_analytic(&params, args.n, &ms)?;
    let cols = if args.empirical {
        vec!["m", "delta_analytic", "delta_empirical", "std_error"]
    } else {
        vec!["m", "delta_analytic"]
    };
    let mut table = Table::new(meta, cols);
    let empirical = if args.empirical { Some(delta_empirical(&params, args.n, &ms, &mc_options(run))?) } else { None };
    for (i, row) in exact.rows.iter().enumerate() {
        let mut cells = vec![row.m.into(), row.delta_value.into()];
        if let Some(e) = &empirical {
            cells.push(e.rows[i].delta_value.into());
            cells.push(e.rows[i].std_error.into());
        }
        table.push(cells);
    }
    table.footer.push(("reference_bound".into(), delta_reference_bound(params.beta, args.n)?.into()));
    Ok(table)
}

fn sim_model(args: &RunArgs) -> Result<ProcessModel, CliError> {
    let gamma = || GammaParams::new(args.alpha, args.p);
    Ok(match process(args)? {
        Process::Poisson => {
            FppParams::new(1.0, args.lambda)?;
            ProcessModel::Poisson { lambda: args.lambda }
        }
        Process::Gamma => ProcessModel::Gamma(gamma()?),
        Process::InvStable => {
            FppParams::new(beta(args)?, 1.0)?;
            ProcessModel::InverseStable { beta: beta(args)? }
        }
        Process::Fpp => ProcessModel::Fpp(FppParams::new(beta(args)?, args.lambda)?),
        Process::Nb => {
            FppParams::new(1.0, args.lambda)?;
            ProcessModel::Nb { lambda: args.lambda, gamma: gamma()? }
        }
        Process::Fnbp => ProcessModel::Fnbp(fnbp(args)?),
        other => {
            return Err(CliError::Validation(format!(
                "simulate supports poisson, gamma, inv-stable, fpp, nb and fnbp, not '{}' (noises are increments of fpp/fnbp paths)",
                other.name()
            )))
        }
    })
}

pub fn simulate(args: &RunArgs) -> Result<Table, CliError> {
    let model = sim_model(args)?;
    let grid = times(args)?;
    let mut spec = PathSpec::new(model, grid)?;
    if let Some(step) = args.stable_step {
        spec = spec.with_stable_step(step)?;
    }
    let paths = run_replications(args.reps, args.seed, args.threads, |seed| sample_process_path(&spec, seed))?;
    let mut table = Table::new(meta("simulate", args, false, true), vec!["replication", "t", "value"]);
    for (r, path) in paths.iter().enumerate() {
        for (&t, &v) in path.times.iter().zip(&path.values) {
            table.push(vec![(r as u64).into(), t.into(), v.into()]);
        }
    }
    Ok(table)
}
