//! Regenerates the worked examples over 𝔽₃ and checks every cell against golden values.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::json;

use ffrace::bias::SpectrumBundle;
use ffrace::characters::CharacterGroup;
use ffrace::densities::{race_trajectory, PeriodicSpectrum};
use ffrace::lfunctions::LTable;
use ffrace::{Field, Modulus, ResidueClass};

use crate::output::{complex, num, Format, Report, RunInfo, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PaperTable {
    /// Character table modulo T²+T+1.
    Chars1,
    /// Real character table modulo T³+2T.
    Chars2,
    /// L-polynomials modulo T²+T+1.
    Lfuncs1,
    /// Limits of E_a(X) by X mod 4 and the exact trajectory on [30, 44].
    Etable,
    /// Exact periodic densities of the three races.
    Densities,
}

const ALL: [PaperTable; 5] =
    [PaperTable::Chars1, PaperTable::Chars2, PaperTable::Lfuncs1, PaperTable::Etable, PaperTable::Densities];

/// Limit values and trajectory agree with the table to this accuracy.
const LIMIT_TOL: f64 = 1e-12;
const TRAJECTORY_TOL: f64 = 0.05;
const TRAJECTORY_WINDOW: (usize, usize) = (30, 44);

#[derive(Clone, Debug, Serialize)]
struct Cell {
    cell: String,
    expected: String,
    got: String,
    pass: bool,
}

#[derive(Clone, Debug, Serialize)]
struct TableOutcome {
    table: PaperTable,
    pass: bool,
    artifacts: Vec<String>,
    cells: Vec<Cell>,
}

struct Ctx<'a> {
    dir: &'a Path,
    artifacts: Vec<String>,
}

impl Ctx<'_> {
    fn write(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn write_json(&mut self, name: &str, value: &serde_json::Value) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    fn write_csv(&mut self, name: &str, table: &Table) -> Result<()> {
        let mut bytes = Vec::new();
        table.write_csv(&mut bytes)?;
        self.write(name, &bytes)
    }
}

pub fn run(tables: &[PaperTable], dir: &Path, format: Format, run_info: &RunInfo) -> Result<()> {
    let mut selected: Vec<PaperTable> = if tables.is_empty() { ALL.to_vec() } else { tables.to_vec() };
    selected.sort();
    selected.dedup();
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;

    let mut outcomes = Vec::new();
    for table in selected {
        let mut ctx = Ctx { dir, artifacts: Vec::new() };
        let cells = match table {
            PaperTable::Chars1 => chars1(&mut ctx)?,
            PaperTable::Chars2 => chars2(&mut ctx)?,
            PaperTable::Lfuncs1 => lfuncs1(&mut ctx)?,
            PaperTable::Etable => etable(&mut ctx)?,
            PaperTable::Densities => densities(&mut ctx)?,
        };
        let pass = cells.iter().all(|c| c.pass);
        outcomes.push(TableOutcome { table, pass, artifacts: ctx.artifacts, cells });
    }

    let failing: Vec<(PaperTable, &Cell)> =
        outcomes.iter().flat_map(|o| o.cells.iter().filter(|c| !c.pass).map(move |c| (o.table, c))).collect();
    let body = json!({
        "directory": dir.display().to_string(),
        "pass": failing.is_empty(),
        "tables": outcomes,
    });
    let mut manifest = Ctx { dir, artifacts: Vec::new() };
    let report = Report::new(body, summary_table(&outcomes))?;
    manifest.write_json("manifest.json", &report.to_json(run_info)?)?;

    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    report.emit(format, run_info, &mut lock)?;
    lock.flush()?;

    if failing.is_empty() {
        return Ok(());
    }
    for (table, c) in &failing {
        eprintln!(
            "FAIL {} {}: expected {}, got {}",
            serde_json::to_value(table)?.as_str().unwrap_or_default(),
            c.cell,
            c.expected,
            c.got
        );
    }
    Err(anyhow!("{} golden cell(s) failed; see {}", failing.len(), dir.join("manifest.json").display()))
}

fn summary_table(outcomes: &[TableOutcome]) -> Table {
    let mut t = Table::new(["table", "cells", "failed", "status", "artifacts"]);
    for o in outcomes {
        let failed = o.cells.iter().filter(|c| !c.pass).count();
        t.push([
            serde_json::to_value(o.table).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            o.cells.len().to_string(),
            failed.to_string(),
            if o.pass { "PASS".to_string() } else { "FAIL".to_string() },
            o.artifacts.join(" "),
        ]);
    }
    t
}

fn group_for(text: &str) -> Result<Arc<CharacterGroup>> {
    let m = Field::new(3)?.parse(text)?;
    Ok(Arc::new(CharacterGroup::new(Arc::new(Modulus::new(&m)?))?))
}

fn classes(m: &Modulus, list: &[&str]) -> Result<Vec<ResidueClass>> {
    list.iter().map(|c| Ok(m.class(&m.field().parse(c)?)?)).collect()
}

/// Pairs each golden row with a distinct computed row. Character numbering is a convention,
/// so rows are compared as a set.
fn match_rows<T, F>(got: &[(usize, Vec<T>)], want: &[Vec<T>], eq: F) -> Vec<Option<usize>>
where
    F: Fn(&T, &T) -> bool,
{
    let mut used = vec![false; got.len()];
    want.iter()
        .map(|w| {
            let hit = got
                .iter()
                .enumerate()
                .position(|(i, (_, g))| !used[i] && g.len() == w.len() && g.iter().zip(w).all(|(a, b)| eq(a, b)));
            hit.map(|i| {
                used[i] = true;
                got[i].0
            })
        })
        .collect()
}

fn character_table_cells(ctx: &mut Ctx, name: &str, modulus: &str, cols: &[&str], want: &[Vec<&str>]) -> Result<Vec<Cell>> {
    let group = group_for(modulus)?;
    let cls = classes(group.modulus(), cols)?;
    let got: Vec<(usize, Vec<String>)> = group
        .characters()
        .iter()
        .map(|chi| (chi.index, cls.iter().map(|a| group.value(chi, a).exact_string()).collect()))
        .collect();
    let mut csv = Table::new(std::iter::once("chi".to_string()).chain(cols.iter().map(|c| c.to_string())));
    for (i, row) in &got {
        csv.push(std::iter::once(i.to_string()).chain(row.iter().cloned()));
    }
    ctx.write_csv(&format!("{name}.csv"), &csv)?;
    ctx.write_json(
        &format!("{name}.json"),
        &json!({ "q": 3, "modulus": modulus, "classes": cols, "rows": got.iter().map(|(i, r)| json!({"chi": i, "values": r})).collect::<Vec<_>>() }),
    )?;

    let want_owned: Vec<Vec<String>> = want.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect();
    let hits = match_rows(&got, &want_owned, |a, b| a == b);
    let mut cells: Vec<Cell> = want_owned
        .iter()
        .zip(&hits)
        .enumerate()
        .map(|(k, (w, hit))| Cell {
            cell: format!("row {}", k + 1),
            expected: w.join(" "),
            got: match hit {
                Some(i) => format!("chi {i}: {}", got.iter().find(|(j, _)| j == i).map(|(_, r)| r.join(" ")).unwrap_or_default()),
                None => "no matching character".into(),
            },
            pass: hit.is_some(),
        })
        .collect();
    cells.push(Cell {
        cell: "row count".into(),
        expected: want.len().to_string(),
        got: got.len().to_string(),
        pass: got.len() == want.len(),
    });
    Ok(cells)
}

fn chars1(ctx: &mut Ctx) -> Result<Vec<Cell>> {
    let (a, b, c, d) = ("(-1+√3i)/2", "(1+√3i)/2", "(1-√3i)/2", "(-1-√3i)/2");
    let want = vec![
        vec!["1", "1", "1", "1", "1", "1"],
        vec!["1", "-1", a, b, c, d],
        vec!["1", "1", d, a, d, a],
        vec!["1", "-1", "1", "-1", "-1", "1"],
        vec!["1", "1", a, d, a, d],
        vec!["1", "-1", d, c, b, a],
    ];
    character_table_cells(ctx, "chars1", "T^2+T+1", &["1", "2", "T", "T+1", "2*T", "2*T+2"], &want)
}

fn chars2(ctx: &mut Ctx) -> Result<Vec<Cell>> {
    let signs: [[i8; 8]; 8] = [
        [1, 1, 1, 1, 1, 1, 1, 1],
        [1, -1, -1, 1, -1, 1, 1, -1],
        [1, 1, 1, -1, -1, 1, -1, -1],
        [1, -1, -1, -1, 1, 1, -1, 1],
        [1, -1, 1, -1, -1, -1, 1, 1],
        [1, 1, -1, 1, -1, -1, -1, 1],
        [1, -1, 1, 1, 1, -1, -1, -1],
        [1, 1, -1, -1, 1, -1, 1, -1],
    ];
    let want: Vec<Vec<&str>> =
        signs.iter().map(|r| r.iter().map(|&s| if s > 0 { "1" } else { "-1" }).collect()).collect();
    let cols = ["1", "2", "T^2+1", "T^2+T+2", "T^2+2*T+2", "2*T^2+2", "2*T^2+T+1", "2*T^2+2*T+1"];
    character_table_cells(ctx, "chars2", "T^3+2*T", &cols, &want)
}

fn lfuncs1(ctx: &mut Ctx) -> Result<Vec<Cell>> {
    let table = LTable::new(group_for("T^2+T+1")?)?;
    let s3 = 3f64.sqrt();
    let want: Vec<Vec<(f64, f64)>> = vec![
        vec![(1.0, 0.0), (0.0, s3)],
        vec![(1.0, 0.0), (-1.0, 0.0)],
        vec![(1.0, 0.0), (-1.0, 0.0)],
        vec![(1.0, 0.0)],
        vec![(1.0, 0.0), (0.0, -s3)],
    ];
    let got: Vec<(usize, Vec<(f64, f64)>)> =
        table.nonprincipal().map(|l| (l.character, l.coeffs.iter().map(|c| (c.re, c.im)).collect())).collect();
    let text = |p: &[(f64, f64)]| p.iter().map(|&(re, im)| complex(re, im)).collect::<Vec<_>>().join(", ");
    let close = |a: &(f64, f64), b: &(f64, f64)| (a.0 - b.0).hypot(a.1 - b.1) < LIMIT_TOL;
    let hits = match_rows(&got, &want, close);
    let mut cells: Vec<Cell> = want
        .iter()
        .zip(&hits)
        .enumerate()
        .map(|(k, (w, hit))| Cell {
            cell: format!("L-polynomial {}", k + 1),
            expected: format!("[{}]", text(w)),
            got: match hit {
                Some(i) => format!("chi {i}: [{}]", text(&got.iter().find(|(j, _)| j == i).expect("matched").1)),
                None => "no matching character".into(),
            },
            pass: hit.is_some(),
        })
        .collect();

    let spectrum = SpectrumBundle::new(&table);
    let pos = spectrum.positive_zeros();
    let zero_ok = pos.len() == 1 && pos[0].multiplicity == 1 && close(&(pos[0].gamma.re, pos[0].gamma.im), &(0.0, s3));
    cells.push(Cell {
        cell: "zeros of modulus √3 in the upper half-plane".into(),
        expected: complex(0.0, s3),
        got: pos.iter().map(|z| complex(z.gamma.re, z.gamma.im)).collect::<Vec<_>>().join(", "),
        pass: zero_ok,
    });

    let mut csv = Table::new(["chi", "degree", "coeffs", "zeros"]);
    for l in table.data() {
        let zeros: Vec<String> = l.zeros.iter().map(|z| complex(z.gamma.re, z.gamma.im)).collect();
        let coeffs: Vec<(f64, f64)> = l.coeffs.iter().map(|c| (c.re, c.im)).collect();
        csv.push([l.character.to_string(), l.degree().to_string(), text(&coeffs), zeros.join(", ")]);
    }
    ctx.write_csv("lfuncs1.csv", &csv)?;
    ctx.write_json("lfuncs1.json", &serde_json::to_value(table.data())?)?;
    Ok(cells)
}

fn etable(ctx: &mut Ctx) -> Result<Vec<Cell>> {
    let group = group_for("T^2+T+1")?;
    let table = LTable::new(group)?;
    let spectrum = SpectrumBundle::new(&table);
    let m = spectrum.modulus();
    let names = ["T", "T+1", "2*T", "2"];
    let cls = classes(m, &names)?;
    let s3 = 3f64.sqrt();
    // Rows for X ≡ 1, 2, 3, 0 (mod 4).
    let golden = [
        [s3 / 2.0, s3, -s3 / 2.0, s3],
        [-1.5, 3.0, 1.5, 0.0],
        [-1.5 * s3, 0.0, 1.5 * s3, 0.0],
        [-1.5, 0.0, 1.5, 3.0],
    ];
    let periodic = PeriodicSpectrum::new(&spectrum)?;
    let mut cells = Vec::new();
    let mut limits = Table::new(std::iter::once("X mod 4".to_string()).chain(names.iter().map(|n| format!("E[{n}]"))));
    for (k, row) in golden.iter().enumerate() {
        let x = k as u64 + 1;
        let got: Vec<f64> = cls.iter().map(|a| periodic.limit(a, x)).collect();
        limits.push(std::iter::once((x % 4).to_string()).chain(got.iter().map(|&v| num(v))));
        for (j, (&w, &g)) in row.iter().zip(&got).enumerate() {
            cells.push(Cell {
                cell: format!("limit X≡{} E[{}]", x % 4, names[j]),
                expected: num(w),
                got: num(g),
                pass: (w - g).abs() <= LIMIT_TOL,
            });
        }
    }
    ctx.write_csv("etable_limits.csv", &limits)?;

    let (lo, hi) = TRAJECTORY_WINDOW;
    let trajectory = race_trajectory(m, &cls, hi)?;
    let mut traj = Table::new(
        std::iter::once("X".to_string())
            .chain(names.iter().map(|n| format!("E[{n}]")))
            .chain(names.iter().map(|n| format!("limit[{n}]"))),
    );
    for p in trajectory.points.iter().filter(|p| (lo..=hi).contains(&p.x)) {
        let row = &golden[(p.x + 3) % 4];
        traj.push(
            std::iter::once(p.x.to_string()).chain(p.e.iter().map(|&v| num(v))).chain(row.iter().map(|&v| num(v))),
        );
        for (j, (&e, &w)) in p.e.iter().zip(row).enumerate() {
            cells.push(Cell {
                cell: format!("X={} E[{}]", p.x, names[j]),
                expected: format!("{} ± {TRAJECTORY_TOL}", num(w)),
                got: num(e),
                pass: (e - w).abs() <= TRAJECTORY_TOL,
            });
        }
    }
    ctx.write_csv("etable_trajectory.csv", &traj)?;
    ctx.write_json(
        "etable.json",
        &json!({
            "q": 3,
            "modulus": "T^2+T+1",
            "classes": names,
            "limits": periodic.limit_table(&cls),
            "trajectory": trajectory,
        }),
    )?;
    Ok(cells)
}

fn densities(ctx: &mut Ctx) -> Result<Vec<Cell>> {
    let races: [(&str, &[&str], &str); 4] = [
        ("T^2+T+1", &["T+1", "2*T", "2"], "1/4"),
        ("T^2+T+1", &["T", "T+1"], "0"),
        ("T^3+2*T", &["1", "T^2+1"], "0"),
        ("T^2+T+1", &["T+1", "T"], "1"),
    ];
    let mut cells = Vec::new();
    let mut rows = Vec::new();
    let mut csv = Table::new(["modulus", "classes", "density", "estimate", "period", "tied residues"]);
    for (modulus, list, expected) in races {
        let table = LTable::new(group_for(modulus)?)?;
        let spectrum = SpectrumBundle::new(&table);
        let cls = classes(spectrum.modulus(), list)?;
        let d = PeriodicSpectrum::new(&spectrum)?.density(&cls)?;
        let got = d.density.to_string();
        csv.push([
            modulus.to_string(),
            list.join(","),
            got.clone(),
            num(d.estimate),
            d.period.to_string(),
            format!("{:?}", d.ties.tied_residues),
        ]);
        rows.push(json!({ "modulus": modulus, "classes": list, "result": d }));
        cells.push(Cell {
            cell: format!("δ({}) mod {modulus}", list.join(", ")),
            expected: expected.to_string(),
            got: got.clone(),
            pass: got == expected,
        });
    }
    ctx.write_csv("densities.csv", &csv)?;
    ctx.write_json("densities.json", &json!({ "q": 3, "races": rows }))?;
    Ok(cells)
}
