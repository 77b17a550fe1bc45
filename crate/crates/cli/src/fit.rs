use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use pairchain::fitting::{
    fit_gamma_alpha, fit_singles_poly, fit_sio2_decay, DataPoint, DataSet, Downstream, FitResult, GammaAlphaModel, Role,
};
use pairchain::presets;
use serde_json::json;

use crate::commands::stdout;
use crate::table::ResultTable;
use crate::NumericalFailure;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Pair rate against passive length: y = A·exp(−2αx).
    Decay,
    /// Pair rate against nonlinear length: γ and α_Si.
    #[value(name = "gamma_alpha")]
    GammaAlpha,
    /// Singles against peak power: n0 + n1·P + a2·P².
    Poly,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// CSV with columns `<x>,y` and optional `sigma` and `l_siox_cm`, where
    /// `<x>` is `l_siox_cm` (decay), `l_si_cm` (gamma_alpha) or `pp_mw` (poly).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub model: Model,
    /// Pump peak power for gamma_alpha (mW).
    #[arg(long, default_value_t = presets::LENGTH_STUDY_PEAK_POWER * 1e3)]
    pub pp_mw: f64,
    /// Pair bandwidth for gamma_alpha (GHz).
    #[arg(long, default_value_t = presets::WDM_BANDWIDTH / 1e9)]
    pub bandwidth_ghz: f64,
    #[arg(long, default_value_t = presets::PULSE_FWHM * 1e12)]
    pub fwhm_ps: f64,
    /// Passive length after the nonlinear section when not given per point (cm).
    #[arg(long, default_value_t = 0.94)]
    pub siox_cm: f64,
    /// Known passive loss (dB/cm); ignored with --cofit.
    #[arg(long, default_value_t = presets::SIOX_LOSS_DB_PER_M / 100.0)]
    pub siox_loss_db_per_cm: f64,
    /// Fit the passive loss as well (needs per-point `l_siox_cm`).
    #[arg(long)]
    pub cofit: bool,
    /// Write the JSON result here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Model {
    fn x_column(self) -> (&'static str, f64, Role) {
        match self {
            Model::Decay => ("l_siox_cm", 1e-2, Role::SioxLength),
            Model::GammaAlpha => ("l_si_cm", 1e-2, Role::SiLength),
            Model::Poly => ("pp_mw", 1e-3, Role::PeakPower),
        }
    }
}

pub fn load_data(text: &str, model: Model) -> anyhow::Result<DataSet> {
    let table = ResultTable::parse(text)?;
    let (xname, factor, role) = model.x_column();
    let col = |name: &str| table.column(name);
    let xi = col(xname).with_context(|| format!("data needs an `{xname}` column"))?;
    let yi = col("y").context("data needs a `y` column")?;
    let si = col("sigma");
    let li = if model == Model::GammaAlpha { col("l_siox_cm") } else { None };
    let cell = |row: &[String], i: usize, what: &str, n: usize| -> anyhow::Result<f64> {
        row[i].trim().parse::<f64>().with_context(|| format!("row {}: bad {what} `{}`", n + 1, row[i]))
    };
    let mut points = Vec::with_capacity(table.rows.len());
    for (n, row) in table.rows.iter().enumerate() {
        let mut p = DataPoint::new(cell(row, xi, xname, n)? * factor, cell(row, yi, "y", n)?);
        if let Some(i) = si {
            p.sigma = Some(cell(row, i, "sigma", n)?);
        }
        if let Some(i) = li {
            p.siox_length = Some(cell(row, i, "l_siox_cm", n)? * 1e-2);
        }
        points.push(p);
    }
    Ok(DataSet::new(role, points))
}

/// Parameter name in output units and the factor from SI.
fn display_unit(name: &str) -> (&str, f64) {
    match name {
        "alpha_si_db_per_m" => ("alpha_si_db_per_cm", 1e-2),
        "alpha_siox_db_per_m" => ("alpha_siox_db_per_cm", 1e-2),
        other => (other, 1.0),
    }
}

fn finite_or_null(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        serde_json::Value::Null
    }
}

pub fn to_json(r: &FitResult) -> serde_json::Value {
    let params: serde_json::Map<String, serde_json::Value> = r
        .parameters
        .iter()
        .map(|p| {
            let (name, f) = display_unit(p.name);
            (
                name.to_owned(),
                json!({
                    "value": p.value * f,
                    "std_error": finite_or_null(p.std_error * f),
                    "identifiable": p.identifiable,
                }),
            )
        })
        .collect();
    json!({
        "model": r.model.name(),
        "parameters": params,
        "rss": r.rss,
        "converged": r.converged,
        "evaluations": r.evaluations,
        "exactly_determined": r.exactly_determined,
        "grid_best_rss": r.grid_best_rss,
    })
}

pub fn run(args: &FitArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.data).with_context(|| format!("cannot read {}", args.data.display()))?;
    let data = load_data(&text, args.model)?;
    let result = match args.model {
        Model::Decay => fit_sio2_decay(&data)?,
        Model::Poly => fit_singles_poly(&data)?,
        Model::GammaAlpha => {
            let downstream = if args.cofit {
                Downstream::CoFit { length: args.siox_cm * 1e-2 }
            } else {
                Downstream::Fixed { length: args.siox_cm * 1e-2, loss_db_per_m: args.siox_loss_db_per_cm * 100.0 }
            };
            let model = GammaAlphaModel::new(args.pp_mw * 1e-3, args.bandwidth_ghz * 1e9, args.fwhm_ps * 1e-12, downstream);
            fit_gamma_alpha(&data, &model)?
        }
    };
    let mut kv = String::new();
    for p in &result.parameters {
        let (name, f) = display_unit(p.name);
        let flag = if p.identifiable { "" } else { " (not identifiable)" };
        kv += &format!("{name} = {} +- {}{flag}\n", p.value * f, p.std_error * f);
    }
    kv += &format!("rss = {}\nconverged = {}\n", result.rss, result.converged);
    if result.exactly_determined {
        kv += "note = exactly determined, no degrees of freedom left for validation\n";
    }
    let json = serde_json::to_string_pretty(&to_json(&result))?;
    match &args.out {
        Some(path) => {
            stdout(&kv)?;
            std::fs::write(path, &json).with_context(|| format!("cannot write {}", path.display()))?
        }
        None => stdout(&format!("{kv}{json}\n"))?,
    }
    if !result.converged {
        bail!(NumericalFailure("fit did not converge within the evaluation budget".into()));
    }
    Ok(())
}
