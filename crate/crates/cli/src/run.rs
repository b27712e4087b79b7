//! Sweep drivers. Each produces a table with one row per grid value, in grid
//! order, ending in a `status` column.

use std::io::Write;

use polariton_casimir::dmodel::{d_casimir_energy, d_force};
use polariton_casimir::hbmodel::{hb_casimir_energy_in, hb_force_in};
use polariton_casimir::spectral::{AtomMedium, Permittivity};
use polariton_casimir::{vacuum_energy, CasimirResult, Error};
use rayon::prelude::*;

use crate::config::{Format, RunConfig, Variable};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok,
    Unconverged,
    Singular,
    Error,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Unconverged => "unconverged",
            Status::Singular => "singular",
            Status::Error => "error",
        }
    }
}

pub struct Row {
    pub cells: Vec<Cell>,
    pub status: Status,
    pub messages: Vec<String>,
}

pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn worst(&self) -> Status {
        self.rows.iter().map(|r| r.status).max().unwrap_or(Status::Ok)
    }

    pub fn write<W: Write>(&self, format: Format, mut out: W) -> std::io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(out, "{},status", self.columns.join(","))?;
                for r in &self.rows {
                    let cells: Vec<String> = r
                        .cells
                        .iter()
                        .map(|c| match c {
                            Cell::Num(x) => format!("{x:.16e}"),
                            Cell::Empty => String::new(),
                        })
                        .collect();
                    writeln!(out, "{},{}", cells.join(","), r.status.as_str())?;
                }
            }
            Format::Json => {
                let rows: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let mut obj = serde_json::Map::new();
                        for (name, c) in self.columns.iter().zip(&r.cells) {
                            let v = match c {
                                Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(serde_json::Value::Null, Into::into),
                                Cell::Empty => serde_json::Value::Null,
                            };
                            obj.insert((*name).to_string(), v);
                        }
                        obj.insert("status".into(), r.status.as_str().into());
                        serde_json::Value::Object(obj)
                    })
                    .collect();
                serde_json::to_writer_pretty(&mut out, &rows)?;
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

/// Accumulates the cells and status of one row.
struct RowBuilder {
    row: Row,
}

impl RowBuilder {
    fn new(x: f64) -> Self {
        Self {
            row: Row {
                cells: vec![Cell::Num(x)],
                status: Status::Ok,
                messages: Vec::new(),
            },
        }
    }

    fn num(&mut self, x: f64) {
        self.row.cells.push(Cell::Num(x));
    }

    fn empty(&mut self) {
        self.row.cells.push(Cell::Empty);
    }

    fn flag(&mut self, s: Status, msg: String) {
        self.row.status = self.row.status.max(s);
        self.row.messages.push(msg);
    }

    /// Records a model result and returns it if available.
    fn result(&mut self, label: &str, r: Option<Result<CasimirResult, Error>>) -> Option<CasimirResult> {
        match r? {
            Ok(r) => {
                if !r.converged {
                    self.flag(Status::Unconverged, format!("{label}: not converged (err {:.3e})", r.err_estimate));
                }
                Some(r)
            }
            Err(e) => {
                self.flag(Status::Error, format!("{label}: {e}"));
                None
            }
        }
    }

    fn finish(self) -> Row {
        self.row
    }
}

fn opt_num(b: &mut RowBuilder, x: Option<f64>) {
    match x {
        Some(x) => b.num(x),
        None => b.empty(),
    }
}

pub fn epsilon_table(cfg: &RunConfig) -> Result<Table, String> {
    let sweep = cfg.sweep();
    if sweep.variable != Variable::Omega {
        return Err(format!("epsilon sweeps omega, not {}", sweep.variable.name()));
    }
    let direct = if cfg.model == crate::config::ModelSel::D { cfg.d_medium()? } else { None };
    let atom = cfg.atom_medium(cfg.params.alpha)?;
    let eps: &dyn Permittivity = match &direct {
        Some(d) => d,
        None => &atom,
    };
    let rows = sweep
        .grid()
        .par_iter()
        .map(|&w| {
            let mut b = RowBuilder::new(w);
            match eps.eps_real(w) {
                Ok(e) if e.re.is_finite() && e.im.is_finite() => {
                    b.num(e.re - 1.0);
                    b.num(e.im);
                }
                Ok(e) => {
                    b.empty();
                    b.empty();
                    b.flag(Status::Singular, format!("omega = {w}: non-finite value {e}"));
                }
                Err(e) => {
                    b.empty();
                    b.empty();
                    b.flag(Status::Singular, format!("omega = {w}: {e}"));
                }
            }
            b.finish()
        })
        .collect();
    Ok(Table {
        columns: vec!["omega", "re_eps_minus_1", "im_eps"],
        rows,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Energy,
    Force,
    Compare,
}

pub fn casimir_table(cfg: &RunConfig, kind: Kind) -> Result<Table, String> {
    let sweep = cfg.sweep();
    if sweep.variable == Variable::Omega {
        return Err("energy, force and compare sweep a or alpha, not omega".into());
    }
    let direct = cfg.d_medium()?;
    let (run_d, run_hb) = match kind {
        Kind::Compare => (true, true),
        _ => (cfg.model.has_d(), cfg.model.has_hb()),
    };
    let grid = sweep.grid();
    // Build every medium up front so that a bad coupling is a config error.
    let media: Vec<AtomMedium> = grid
        .iter()
        .map(|&x| cfg.atom_medium(cfg.params_at(x).alpha))
        .collect::<Result<_, _>>()?;
    let q = cfg.quad();
    let rows = grid
        .par_iter()
        .zip(media.par_iter())
        .map(|(&x, m)| {
            let p = cfg.params_at(x);
            let d_eps: &dyn Permittivity = match &direct {
                Some(d) => d,
                None => m,
            };
            let (d, hb) = match kind {
                Kind::Force => (
                    run_d.then(|| d_force(&p, d_eps, &q)),
                    run_hb.then(|| hb_force_in(m, p.a, &q)),
                ),
                _ => (
                    run_d.then(|| d_casimir_energy(&p, d_eps, &q)),
                    run_hb.then(|| hb_casimir_energy_in(m, p.a, &q)),
                ),
            };
            let mut b = RowBuilder::new(x);
            let d = b.result("D", d);
            let hb = b.result("HB", hb);
            let (vd, vhb) = (d.map(|r| r.interaction), hb.map(|r| r.interaction));
            match kind {
                Kind::Energy => b.num(vacuum_energy(p.a)),
                Kind::Force | Kind::Compare => {}
            }
            opt_num(&mut b, vd);
            opt_num(&mut b, vhb);
            if kind == Kind::Compare {
                opt_num(&mut b, vd.zip(vhb).map(|(d, h)| h - d));
            }
            opt_num(&mut b, d.map(|r| r.err_estimate));
            opt_num(&mut b, hb.map(|r| r.err_estimate));
            b.finish()
        })
        .collect();
    let var = sweep.variable.name();
    let columns = match kind {
        Kind::Energy => vec![var, "e_vacuum", "e1_d", "e1_hb", "err_d", "err_hb"],
        Kind::Force => vec![var, "f_d", "f_hb", "err_d", "err_hb"],
        Kind::Compare => vec![var, "e1_d", "e1_hb", "e1_hb_minus_e1_d", "err_d", "err_hb"],
    };
    Ok(Table { columns, rows })
}
