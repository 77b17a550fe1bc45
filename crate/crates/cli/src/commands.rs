use std::path::Path;

use anyhow::{bail, Context};
use pairchain::chain::pair_rate_from_counts;
use pairchain::montecarlo::{self, CountSummary, TrialConfig};
use pairchain::{presets, PairStatistics, RatePrediction, Scenario, SweepVariable};

use crate::config::ExperimentConfig;
use crate::table::{num, opt, ResultTable};
use crate::{Input, McArgs, SweepVar};

/// Peak-power range (W) searched for the CAR maximum.
const CAR_SEARCH: (f64, f64) = (1e-5, 1.0);

pub struct Loaded {
    pub config: ExperimentConfig,
    pub scenario: Scenario,
    pub stats: PairStatistics,
    pub source: String,
}

pub fn load(input: &Input) -> anyhow::Result<Loaded> {
    let (config, source) = match (&input.config, &input.preset) {
        (Some(path), None) => (ExperimentConfig::load(path)?, path.display().to_string()),
        (None, Some(name)) => {
            (ExperimentConfig::from_scenario(&presets::by_name(name)?), format!("preset {name}"))
        }
        _ => bail!("give either a config path or --preset"),
    };
    let scenario = config.to_scenario()?;
    let stats = config.pair_statistics();
    Ok(Loaded { config, scenario, stats, source })
}

pub fn header(table: &mut ResultTable, command: &str, loaded: Option<&Loaded>) {
    table.meta("tool", format!("pairchain {}", env!("CARGO_PKG_VERSION")));
    table.meta("command", command);
    if let Some(l) = loaded {
        table.meta("source", &l.source);
        table.meta("config_sha256", l.config.hash());
    }
}

/// Writes to standard output; a closed pipe (e.g. `| head`) is not an error.
pub fn stdout(text: &str) -> anyhow::Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

pub fn emit(table: &ResultTable, out: Option<&Path>) -> anyhow::Result<()> {
    let text = table.to_csv();
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => stdout(&text),
    }
}

const PREDICT_COLUMNS: [&str; 14] = [
    "peak_power_mw",
    "mu_pair_generated",
    "mu_pair_out",
    "mu_signal",
    "mu_idler",
    "p_click_signal",
    "p_click_idler",
    "p_coincidence",
    "p_accidental",
    "coincidence_rate_hz",
    "accidental_rate_hz",
    "car",
    "gate_duty_signal",
    "gate_duty_idler",
];

fn predict_cells(p: &RatePrediction, rep_rate: f64) -> Vec<String> {
    vec![
        num(p.peak_power * 1e3),
        num(p.mu_pair_generated),
        num(p.mu_pair_out),
        num(p.mu_signal),
        num(p.mu_idler),
        num(p.p_click_signal),
        num(p.p_click_idler),
        num(p.p_coincidence),
        num(p.p_accidental),
        num(p.p_coincidence * rep_rate),
        num(p.p_accidental * rep_rate),
        opt(p.car),
        num(p.gate_duty.signal),
        num(p.gate_duty.idler),
    ]
}

pub fn predict(input: &Input, out: Option<&Path>) -> anyhow::Result<()> {
    let l = load(input)?;
    let p = pairchain::chain::predict_with(&l.scenario.chain, &l.scenario.pump, l.stats)?;
    let rate = l.scenario.pump.repetition_rate;
    let cells = predict_cells(&p, rate);
    let mut kv = String::new();
    for (k, v) in PREDICT_COLUMNS.iter().zip(&cells) {
        let v = if v.is_empty() { "undefined" } else { v };
        kv += &format!("{k} = {v}\n");
    }
    if out.is_none() {
        kv.push('\n');
    }
    stdout(&kv)?;
    for w in montecarlo::warnings(&pairchain::chain::PulseModel::new(&l.scenario.chain, &l.scenario.pump)?) {
        eprintln!("warning: {w}");
    }
    let mut t = ResultTable::new(PREDICT_COLUMNS);
    header(&mut t, "predict", Some(&l));
    t.push(cells);
    emit(&t, out)
}

fn with_threads<T: Send>(threads: Option<u64>, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    match threads {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new().num_threads(n as usize).build()?.install(f)),
        None => Ok(f()),
    }
}

fn trial(mc: &McArgs, stats: PairStatistics) -> TrialConfig {
    let mut t = TrialConfig::new(mc.pulses, mc.seed);
    t.pair_statistics = stats;
    if mc.no_dead_time {
        t = t.without_dead_time();
    }
    t
}

const MC_COLUMNS: [&str; 16] = [
    "n_pulses",
    "singles_signal",
    "singles_idler",
    "coincidences",
    "accidentals",
    "accidental_opportunities",
    "active_gates_signal",
    "active_gates_idler",
    "p_click_signal_mc",
    "p_click_idler_mc",
    "p_coincidence_mc",
    "p_coincidence_mc_err",
    "p_accidental_mc",
    "car_mc",
    "car_mc_err",
    "mu_pair_net_mc",
];

fn mc_cells(c: &CountSummary, s: &Scenario) -> anyhow::Result<Vec<String>> {
    let p = s.predict()?;
    let rate = s.pump.repetition_rate;
    let eta = p.detection_efficiency;
    let net = pair_rate_from_counts(c.coincidence_rate(rate), c.accidental_rate(rate), rate, eta.signal, eta.idler).ok();
    let ps = c.singles_probability();
    Ok(vec![
        c.n_pulses.to_string(),
        c.singles.signal.to_string(),
        c.singles.idler.to_string(),
        c.coincidences.to_string(),
        c.accidentals.to_string(),
        c.accidental_opportunities.to_string(),
        c.active_gates.signal.to_string(),
        c.active_gates.idler.to_string(),
        num(ps.signal),
        num(ps.idler),
        num(c.coincidence_probability()),
        num(c.coincidence_std_error()),
        num(c.accidental_probability()),
        opt(c.car()),
        opt(c.car_std_error()),
        opt(net),
    ])
}

pub fn simulate(input: &Input, mc: &McArgs, out: Option<&Path>) -> anyhow::Result<()> {
    let l = load(input)?;
    let trial = trial(mc, l.stats);
    let model = pairchain::chain::PulseModel::new(&l.scenario.chain, &l.scenario.pump)?;
    for w in montecarlo::warnings(&model) {
        eprintln!("warning: {w}");
    }
    let counts = with_threads(mc.threads, || montecarlo::simulate(&l.scenario.chain, &l.scenario.pump, &trial))??;
    let p = pairchain::chain::predict_with(&l.scenario.chain, &l.scenario.pump, l.stats)?;
    let mut cols: Vec<&str> = MC_COLUMNS.to_vec();
    cols.extend(["car_predicted", "p_coincidence_predicted"]);
    let mut t = ResultTable::new(cols);
    header(&mut t, "simulate", Some(&l));
    t.meta("seed", mc.seed).meta("pulses", mc.pulses).meta("dead_time", !mc.no_dead_time);
    let mut row = mc_cells(&counts, &l.scenario)?;
    row.extend([opt(p.car), num(p.p_coincidence)]);
    t.push(row);
    emit(&t, out)
}

/// Parses `lin:a:b:n`, `log:a:b:n` or `v1,v2,...`.
pub fn parse_grid(spec: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts.as_slice() {
        [kind @ ("lin" | "log"), a, b, n] => {
            let a: f64 = a.parse().with_context(|| format!("bad grid start `{a}`"))?;
            let b: f64 = b.parse().with_context(|| format!("bad grid stop `{b}`"))?;
            let n: usize = n.parse().with_context(|| format!("bad grid count `{n}`"))?;
            if n == 0 {
                bail!("grid needs at least one point");
            }
            let at = |i: usize| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            if *kind == "lin" {
                (0..n).map(|i| a + (b - a) * at(i)).collect()
            } else {
                if !(a > 0.0 && b > 0.0) {
                    bail!("log grid bounds must be positive");
                }
                (0..n).map(|i| a * (b / a).powf(at(i))).collect()
            }
        }
        [list] => list
            .split(',')
            .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad grid value `{v}`")))
            .collect::<anyhow::Result<Vec<f64>>>()?,
        _ => bail!("grid must be lin:START:STOP:N, log:START:STOP:N or a comma-separated list"),
    };
    if grid.iter().any(|v| !v.is_finite()) {
        bail!("grid values must be finite");
    }
    Ok(grid)
}

impl SweepVar {
    fn variable(self) -> SweepVariable {
        match self {
            SweepVar::LSi => SweepVariable::SiLength,
            SweepVar::LSiox => SweepVariable::SioxLength,
            SweepVar::Pp => SweepVariable::PeakPower,
            SweepVar::AwgLoss => SweepVariable::AwgLoss,
            SweepVar::Dark => SweepVariable::DarkRate,
        }
    }

    /// Column name and factor from the command-line unit to SI.
    fn unit(self) -> (&'static str, f64) {
        match self {
            SweepVar::LSi => ("l_si_cm", 1e-2),
            SweepVar::LSiox => ("l_siox_cm", 1e-2),
            SweepVar::Pp => ("pp_mw", 1e-3),
            SweepVar::AwgLoss => ("awg_loss_db", 1.0),
            SweepVar::Dark => ("dark_hz", 1.0),
        }
    }
}

pub fn sweep(input: &Input, var: SweepVar, grid: &str, mc: Option<&McArgs>, out: Option<&Path>) -> anyhow::Result<()> {
    let l = load(input)?;
    let grid = parse_grid(grid)?;
    let (name, factor) = var.unit();
    let si: Vec<f64> = grid.iter().map(|v| v * factor).collect();

    let mut cols = vec![name];
    cols.extend(PREDICT_COLUMNS);
    cols.extend(["car_max", "pp_at_car_max_mw"]);
    if mc.is_some() {
        cols.extend(MC_COLUMNS);
    }
    let mut t = ResultTable::new(cols);
    header(&mut t, "sweep", Some(&l));
    t.meta("variable", name).meta("grid", grid.iter().map(|v| num(*v)).collect::<Vec<_>>().join(","));

    let points = match mc {
        Some(args) => {
            t.meta("seed", args.seed).meta("pulses", args.pulses).meta("dead_time", !args.no_dead_time);
            let trial = trial(args, l.stats);
            let pts = with_threads(args.threads, || montecarlo::sweep(&l.scenario, var.variable(), &si, &trial))??;
            pts.into_iter().map(|p| (p.scenario, Some(p.counts))).collect::<Vec<_>>()
        }
        None => si
            .iter()
            .map(|&v| Ok((var.variable().apply(&l.scenario, v)?, None)))
            .collect::<anyhow::Result<Vec<_>>>()?,
    };
    let rate = l.scenario.pump.repetition_rate;
    for (value, (scenario, counts)) in grid.iter().zip(points) {
        let p = pairchain::chain::predict_with(&scenario.chain, &scenario.pump, l.stats)?;
        let mut row = vec![num(*value)];
        row.extend(predict_cells(&p, rate));
        match scenario.car_maximum(CAR_SEARCH.0, CAR_SEARCH.1) {
            Ok((pp, car)) => row.extend([num(car), num(pp * 1e3)]),
            Err(_) => row.extend([String::new(), String::new()]),
        }
        if let Some(c) = counts {
            row.extend(mc_cells(&c, &scenario)?);
        }
        t.push(row);
    }
    emit(&t, out)
}

pub fn preset(name: Option<&str>) -> anyhow::Result<()> {
    match name {
        Some(n) => stdout(&format!("{}\n", ExperimentConfig::from_scenario(&presets::by_name(n)?).to_json())),
        None => stdout(&presets::PRESET_NAMES.map(|n| format!("{n}\n")).concat()),
    }
}
