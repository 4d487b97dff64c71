use std::sync::Arc;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use ffrace::bias::SpectrumBundle;
use ffrace::characters::CharacterGroup;
use ffrace::densities::{
    calibrate_parity, density_asymptotic, density_exact_periodic, density_monte_carlo, race_trajectory,
    LimitingSampler,
};
use ffrace::lfunctions::{LData, LTable};
use ffrace::{Field, Modulus, ResidueClass};

use crate::output::{complex, num, Report, Table};
use crate::{Command, EngineArg, GlobalArgs, UsageError};

pub fn dispatch(g: &GlobalArgs, cmd: &Command) -> Result<Report> {
    match cmd {
        Command::Chars { classes } => chars(g, classes.as_deref()),
        Command::Lfunc { character } => lfunc(g, *character),
        Command::Zeros { character } => zeros(g, *character),
        Command::Bias { classes, predictors } => bias(g, classes, *predictors),
        Command::Density { engine, classes, draws, xmax, mode } => {
            density(g, *engine, classes, *draws, *xmax, (*mode).into())
        }
        Command::Race { classes, xmax, calibrate } => race(g, classes, *xmax, *calibrate),
        Command::Reproduce { .. } => unreachable!("handled by the caller"),
    }
}

fn load_modulus(g: &GlobalArgs) -> Result<Modulus> {
    let text = g.modulus.as_deref().ok_or_else(|| UsageError("--modulus is required".into()))?;
    let field = Field::new(g.q)?;
    let m = field.parse(text)?;
    Ok(Modulus::with_cap(&m, g.phi_cap)?)
}

fn load_group(g: &GlobalArgs) -> Result<Arc<CharacterGroup>> {
    Ok(Arc::new(CharacterGroup::new(Arc::new(load_modulus(g)?))?))
}

fn load_table(g: &GlobalArgs) -> Result<LTable> {
    let table = LTable::with_degree_cap(load_group(g)?, g.degree_cap).context("computing L-functions")?;
    Ok(table)
}

/// Parses a comma-separated list of residues; they must be distinct units.
pub fn parse_classes(modulus: &Modulus, text: &str, min: usize) -> Result<Vec<ResidueClass>> {
    let field = modulus.field();
    let mut out: Vec<ResidueClass> = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let class = modulus.class(&field.parse(item)?)?;
        if out.iter().any(|c| c.flat() == class.flat()) {
            return Err(UsageError(format!("{item} repeats an earlier class modulo {}", modulus.poly())).into());
        }
        out.push(class);
    }
    if out.len() < min {
        return Err(UsageError(format!("need at least {min} classes, got {}", out.len())).into());
    }
    Ok(out)
}

fn check_character(table_len: usize, index: Option<usize>) -> Result<()> {
    match index {
        Some(i) if i >= table_len => {
            Err(UsageError(format!("character index {i} out of range (φ(m) = {table_len})")).into())
        }
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct CharacterRow {
    index: usize,
    order: u64,
    conductor: String,
    even: bool,
    primitive: bool,
    values: Vec<String>,
}

fn chars(g: &GlobalArgs, classes: Option<&str>) -> Result<Report> {
    let group = load_group(g)?;
    let m = group.modulus();
    let cols: Vec<ResidueClass> = match classes {
        Some(text) => parse_classes(m, text, 1)?,
        None => m.units().collect(),
    };
    let names: Vec<String> = cols.iter().map(|c| c.to_string()).collect();
    let mut table = Table::new(["chi", "order", "conductor"].into_iter().map(String::from).chain(names.clone()));
    let mut rows = Vec::new();
    for chi in group.characters() {
        let values: Vec<String> = cols.iter().map(|a| group.value(chi, a).exact_string()).collect();
        table.push([chi.index.to_string(), chi.order.to_string(), chi.conductor.to_string()].into_iter().chain(values.clone()));
        rows.push(CharacterRow {
            index: chi.index,
            order: chi.order,
            conductor: chi.conductor.to_string(),
            even: chi.even,
            primitive: chi.is_primitive(m.poly()),
            values,
        });
    }
    let body = json!({
        "q": m.q(),
        "modulus": m.poly().to_string(),
        "phi": m.phi(),
        "invariants": m.orders(),
        "classes": names,
        "characters": rows,
    });
    Report::new(body, table)
}

fn ldata_json(l: &LData) -> Value {
    json!({
        "char": l.character,
        "coeffs": l.coeffs.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
        "zeros": l.zeros.iter().map(|z| json!({
            "re": z.gamma.re,
            "im": z.gamma.im,
            "kind": z.kind,
            "mult": z.multiplicity,
        })).collect::<Vec<_>>(),
    })
}

fn lfunc(g: &GlobalArgs, character: Option<usize>) -> Result<Report> {
    let table = load_table(g)?;
    check_character(table.data().len(), character)?;
    let selected: Vec<&LData> = table.data().iter().filter(|l| character.is_none_or(|i| l.character == i)).collect();
    let mut out = Table::new(["char", "degree", "coeffs", "zeros"]);
    for l in &selected {
        let coeffs: Vec<String> = l.coeffs.iter().map(|c| complex(c.re, c.im)).collect();
        let zeros: Vec<String> = l
            .zeros
            .iter()
            .map(|z| {
                let base = complex(z.gamma.re, z.gamma.im);
                if z.multiplicity > 1 {
                    format!("{base} (x{})", z.multiplicity)
                } else {
                    base
                }
            })
            .collect();
        out.push([l.character.to_string(), l.degree().to_string(), coeffs.join(", "), zeros.join(", ")]);
    }
    let body = match character {
        Some(_) => ldata_json(selected[0]),
        None => json!({ "l_functions": selected.iter().map(|l| ldata_json(l)).collect::<Vec<_>>() }),
    };
    Report::new(body, out)
}

fn zeros(g: &GlobalArgs, character: Option<usize>) -> Result<Report> {
    let table = load_table(g)?;
    check_character(table.data().len(), character)?;
    let spectrum = SpectrumBundle::new(&table);
    let mut out = Table::new(["char", "re", "im", "abs", "theta/pi", "kind", "mult"]);
    let mut list = Vec::new();
    for l in table.data().iter().filter(|l| character.is_none_or(|i| l.character == i)) {
        for z in &l.zeros {
            let theta = z.theta / std::f64::consts::PI;
            out.push([
                l.character.to_string(),
                num(z.gamma.re),
                num(z.gamma.im),
                num(z.gamma.norm()),
                num(theta),
                serde_json::to_value(z.kind)?.as_str().unwrap_or_default().to_string(),
                z.multiplicity.to_string(),
            ]);
            list.push(json!({
                "char": l.character,
                "re": z.gamma.re,
                "im": z.gamma.im,
                "theta": z.theta,
                "kind": z.kind,
                "mult": z.multiplicity,
            }));
        }
    }
    let body = json!({
        "modulus": table.group().modulus().poly().to_string(),
        "n_m": spectrum.n_m(),
        "positive_zero_count": spectrum.positive_zeros().iter().map(|z| z.multiplicity).sum::<usize>(),
        "real_zero_count": spectrum.real_zeros().iter().map(|z| z.multiplicity).sum::<usize>(),
        "li": spectrum.li_diagnostics(),
        "zeros": list,
    });
    Report::new(body, out)
}

fn bias(g: &GlobalArgs, classes: &str, predictors: bool) -> Result<Report> {
    let table = load_table(g)?;
    let spectrum = SpectrumBundle::new(&table);
    let cls = parse_classes(spectrum.modulus(), classes, 2)?;
    let mut report = spectrum.race_report(&cls)?;
    if predictors {
        report = spectrum.with_predictors(report, &cls);
    }
    let mut out = Table::new(
        ["class", "C_m"].into_iter().map(String::from).chain(report.classes.iter().map(|c| format!("cov[{c}]"))),
    );
    for (j, name) in report.classes.iter().enumerate() {
        out.push(
            [name.clone(), report.c_values[j].to_string()].into_iter().chain(report.covariance[j].iter().map(|&x| num(x))),
        );
    }
    Report::new(&report, out)
}

fn density(
    g: &GlobalArgs,
    engine: EngineArg,
    classes: &str,
    draws: u64,
    xmax: usize,
    mode: ffrace::densities::AsymptoticMode,
) -> Result<Report> {
    if engine == EngineArg::Mc && g.seed.is_none() {
        return Err(UsageError("the mc engine needs --seed or FFRACE_SEED".into()).into());
    }
    let table = load_table(g)?;
    let spectrum = SpectrumBundle::new(&table);
    let m = spectrum.modulus();
    let cls = parse_classes(m, classes, 2)?;
    let report = spectrum.race_report(&cls)?;
    if spectrum.li_violation() && matches!(engine, EngineArg::Asymptotic | EngineArg::Mc) {
        eprintln!("warning: the spectrum violates linear independence; prefer --engine periodic or count");
    }
    let mut metadata = json!({ "N_m": report.n_m, "B": report.b, "C": report.c_values });
    let mut body = json!({ "engine": engine, "classes": report.classes });
    let mut kv: Vec<(&str, String)> = vec![("engine", format!("{engine:?}").to_lowercase()), ("classes", report.classes.join(","))];
    match engine {
        EngineArg::Periodic => {
            let d = density_exact_periodic(&spectrum, &cls)?;
            body["estimate"] = json!(d.estimate);
            body["exact"] = json!(d.density.to_string());
            body["ties"] = serde_json::to_value(&d.ties)?;
            metadata["period"] = json!(d.period);
            metadata["parity"] = serde_json::to_value(d.parity)?;
            kv.push(("estimate", num(d.estimate)));
            kv.push(("exact", d.density.to_string()));
            kv.push(("period", d.period.to_string()));
            kv.push(("tied residues", format!("{:?}", d.ties.tied_residues)));
            kv.push(("bracket", format!("[{}, {}]", d.ties.lower, d.ties.upper)));
        }
        EngineArg::Asymptotic => {
            let d = density_asymptotic(&report, m.q(), m.phi(), m.cm(&m.one()), m.degree(), mode)?;
            body["estimate"] = json!(d.estimate);
            body["baseline"] = json!(d.baseline);
            body["error_scale"] = json!(d.error_scale);
            body["terms"] = serde_json::to_value(&d.terms)?;
            body["mode"] = serde_json::to_value(mode)?;
            kv.push(("estimate", num(d.estimate)));
            kv.push(("baseline", num(d.baseline)));
            kv.push(("error scale", num(d.error_scale)));
        }
        EngineArg::Mc => {
            let seed = g.seed.expect("checked above");
            let sampler = LimitingSampler::new(&spectrum, &cls)?;
            let est = density_monte_carlo(&sampler, &[(0..cls.len()).collect()], draws, seed)?[0];
            body["estimate"] = json!(est.estimate);
            body["stderr"] = json!(est.stderr);
            body["draws"] = json!(draws);
            body["seed"] = json!(seed);
            kv.push(("estimate", num(est.estimate)));
            kv.push(("stderr", num(est.stderr)));
            kv.push(("draws", draws.to_string()));
        }
        EngineArg::Count => {
            let t = race_trajectory(m, &cls, xmax)?;
            body["estimate"] = json!(t.ordered_fraction());
            body["x_max"] = json!(xmax);
            body["ordered_count"] = json!(t.ordered_set.len());
            kv.push(("estimate", num(t.ordered_fraction())));
            kv.push(("x_max", xmax.to_string()));
            kv.push(("ordered X", t.ordered_set.len().to_string()));
        }
    }
    kv.push(("N_m", num(report.n_m)));
    kv.push(("C", format!("{:?}", report.c_values)));
    body["metadata"] = metadata;
    Report::new(body, Table::key_values(kv))
}

fn race(g: &GlobalArgs, classes: &str, xmax: usize, calibrate: Option<(usize, usize)>) -> Result<Report> {
    let modulus = load_modulus(g)?;
    let cls = parse_classes(&modulus, classes, 2)?;
    let trajectory = race_trajectory(&modulus, &cls, xmax)?;
    let calibration = match calibrate {
        Some(window) => {
            if window.1 > xmax {
                return Err(UsageError(format!("calibration window ends at {} beyond --xmax {xmax}", window.1)).into());
            }
            let spectrum = SpectrumBundle::new(&load_table(g)?);
            Some(calibrate_parity(&spectrum, &trajectory, &cls, window)?)
        }
        None => None,
    };
    let mut out = Table::new(
        std::iter::once("X".to_string())
            .chain(trajectory.classes.iter().map(|c| format!("E[{c}]")))
            .chain(trajectory.classes.iter().map(|c| format!("rank[{c}]")))
            .chain(std::iter::once("ordered".to_string())),
    );
    for p in &trajectory.points {
        out.push(
            std::iter::once(p.x.to_string())
                .chain(p.e.iter().map(|&e| num(e)))
                .chain(p.rank.iter().map(|k| (k + 1).to_string()))
                .chain(std::iter::once(p.ordered.to_string())),
        );
    }
    let mut body = serde_json::to_value(&trajectory)?;
    body["ordered_fraction"] = json!(trajectory.ordered_fraction());
    if let Some(c) = calibration {
        body["calibration"] = serde_json::to_value(c)?;
    }
    Report::new(body, out)
}
