//! Named protocols: parameter schemas, result rows and summaries.

use std::collections::BTreeMap;
use std::str::FromStr;

use ifm::composite::{nested_ifm, NestedConfig};
use ifm::protocols::{
    dicke_energy_shift, efficiency_frontier, ev_iterated, ev_iterated_monte_carlo, ev_report,
    ev_single_shot, irradiation_metric, negative_result_update, paul_pavicic, uniform_sectors,
    zeno_ifm, CavityConfig, IrradiationProtocol, ZenoConfig,
};
use ifm::table::{format_float, Cell, Table};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::params::{Key, Setting, Settings};

pub const NAMES: [&str; 9] = [
    "ev",
    "ev-iterated",
    "frontier",
    "zeno",
    "cavity",
    "renninger",
    "dicke",
    "irradiation",
    "nested",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Ev,
    EvIterated,
    Frontier,
    Zeno,
    Cavity,
    Renninger,
    Dicke,
    Irradiation,
    Nested,
}

impl FromStr for Protocol {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "ev" => Protocol::Ev,
            "ev-iterated" => Protocol::EvIterated,
            "frontier" => Protocol::Frontier,
            "zeno" => Protocol::Zeno,
            "cavity" => Protocol::Cavity,
            "renninger" => Protocol::Renninger,
            "dicke" => Protocol::Dicke,
            "irradiation" => Protocol::Irradiation,
            "nested" => Protocol::Nested,
            other => return Err(CliError::UnknownProtocol(other.to_string())),
        })
    }
}

/// Accepted numeric keys with defaults (`None`: optional, no default).
struct Schema {
    keys: &'static [(Key, Option<f64>)],
    /// Default for `bomb`, if the protocol takes it.
    bomb: Option<bool>,
    coupled: Option<bool>,
}

/// One fully resolved parameter point.
#[derive(Debug, Clone)]
pub struct Point {
    values: BTreeMap<Key, f64>,
    bomb: Option<bool>,
    coupled: Option<bool>,
    seed: u64,
}

impl Point {
    fn get(&self, key: Key) -> f64 {
        self.values[&key]
    }

    fn int(&self, key: Key) -> usize {
        self.values[&key] as usize
    }

    fn opt(&self, key: Key) -> Option<f64> {
        self.values.get(&key).copied()
    }

    /// Object transmission: explicit `t`, else opaque when `bomb` is set.
    fn object(&self) -> Option<Complex64> {
        match (self.opt(Key::T), self.bomb) {
            (Some(t), _) => Some(Complex64::new(t, 0.0)),
            (None, Some(true)) => Some(Complex64::new(0.0, 0.0)),
            _ => None,
        }
    }
}

pub struct Report {
    pub name: String,
    pub table: Table,
    pub summary: String,
    /// Column used as the abscissa of SVG plots, if any.
    pub x: Option<String>,
    pub ys: Vec<String>,
}

fn num(x: f64) -> Cell {
    Cell::Num(x)
}

fn opt_num(x: Option<f64>) -> Cell {
    x.map_or_else(|| Cell::Text(String::new()), Cell::Num)
}

fn t_cell(point: &Point) -> Cell {
    match point.object() {
        Some(t) => num(t.re),
        None => Cell::Text("none".into()),
    }
}

impl Protocol {
    pub fn name(self) -> &'static str {
        NAMES[self as usize]
    }

    fn schema(self) -> Schema {
        use Key::*;
        match self {
            Protocol::Ev => Schema {
                keys: &[(R, Some(0.5)), (T, None)],
                bomb: Some(false),
                coupled: None,
            },
            Protocol::EvIterated => Schema {
                keys: &[(R, Some(0.5)), (Trials, Some(0.0))],
                bomb: None,
                coupled: None,
            },
            Protocol::Frontier => Schema {
                keys: &[(R, None)],
                bomb: None,
                coupled: None,
            },
            Protocol::Zeno => Schema {
                keys: &[(N, Some(25.0)), (T, None)],
                bomb: Some(true),
                coupled: None,
            },
            Protocol::Cavity => Schema {
                keys: &[(MirrorR, Some(0.9)), (M, Some(3.0))],
                bomb: Some(false),
                coupled: None,
            },
            Protocol::Renninger => Schema {
                keys: &[(Sectors, Some(8.0)), (Covered, Some(4.0))],
                bomb: None,
                coupled: None,
            },
            Protocol::Dicke => Schema {
                keys: &[(NBasis, Some(50.0))],
                bomb: None,
                coupled: None,
            },
            Protocol::Irradiation => Schema {
                keys: &[(T, Some(0.0)), (R, Some(0.5)), (N, Some(25.0))],
                bomb: None,
                coupled: None,
            },
            Protocol::Nested => Schema {
                keys: &[(R, Some(0.5))],
                bomb: None,
                coupled: Some(true),
            },
        }
    }

    fn has_mc(self, settings: &Settings) -> bool {
        self == Protocol::EvIterated && settings.values.contains_key(&Key::Trials)
    }

    fn columns(self, with_mc: bool) -> Vec<&'static str> {
        match self {
            Protocol::Ev => vec!["R", "t", "D1", "D2", "explosion", "residual", "eta"],
            Protocol::EvIterated if with_mc => vec![
                "R",
                "p_success",
                "p_explosion",
                "eta",
                "trials",
                "mc_p_success",
                "mc_std_error",
                "mc_mean_shots",
            ],
            Protocol::EvIterated => vec!["R", "p_success", "p_explosion", "eta"],
            Protocol::Frontier => vec!["R", "eta"],
            Protocol::Zeno => vec!["N", "t", "p_success", "p_explosion", "p_inconclusive", "eta"],
            Protocol::Cavity => vec!["r", "M", "bomb", "p_reflect", "p_transmit", "p_absorb"],
            Protocol::Renninger => vec!["sectors", "covered", "p_null", "survivor_probability"],
            Protocol::Dicke => vec!["n_basis", "e_before", "e_after", "p_null", "captured_norm"],
            Protocol::Irradiation => vec!["t", "R", "N", "ev_metric", "zeno_metric"],
            Protocol::Nested => vec![
                "R",
                "coupled",
                "p_both_dark",
                "abl_object",
                "abl_photon",
                "abl_both",
            ],
        }
    }

    fn plotted(self) -> &'static [&'static str] {
        match self {
            Protocol::Ev => &["D1", "D2", "explosion"],
            Protocol::EvIterated => &["p_success", "eta"],
            Protocol::Frontier => &["eta"],
            Protocol::Zeno => &["p_success", "p_explosion"],
            Protocol::Cavity => &["p_reflect", "p_transmit", "p_absorb"],
            Protocol::Renninger => &["p_null"],
            Protocol::Dicke => &["e_after"],
            Protocol::Irradiation => &["ev_metric", "zeno_metric"],
            Protocol::Nested => &["p_both_dark"],
        }
    }

    /// Checks every setting against the schema and range rules.
    fn validate(self, settings: &Settings) -> CliResult<()> {
        let schema = self.schema();
        for key in settings.values.keys() {
            if !schema.keys.iter().any(|(k, _)| k == key) {
                return Err(CliError::Validation(format!(
                    "parameter `{key}` does not apply to `{}`",
                    self.name()
                )));
            }
        }
        if settings.bomb.is_some() && schema.bomb.is_none() {
            return Err(CliError::Validation(format!(
                "`bomb` does not apply to `{}`",
                self.name()
            )));
        }
        if settings.coupled.is_some() && schema.coupled.is_none() {
            return Err(CliError::Validation(format!(
                "`coupled` does not apply to `{}`",
                self.name()
            )));
        }
        if settings.bomb == Some(true) && settings.values.contains_key(&Key::T) {
            return Err(CliError::Validation(
                "give either `bomb` or `t`, not both".into(),
            ));
        }
        for (key, setting) in &settings.values {
            let points = match setting {
                Setting::Scalar(x) => std::slice::from_ref(x),
                Setting::Grid(xs) => xs.as_slice(),
            };
            for &x in points {
                check_range(*key, x)?;
            }
        }
        Ok(())
    }

    fn resolve(self, settings: &Settings, overrides: &[(Key, f64)], seed: u64) -> Point {
        let schema = self.schema();
        let mut values = BTreeMap::new();
        for &(key, default) in schema.keys {
            let v = match settings.values.get(&key) {
                Some(Setting::Scalar(x)) => Some(*x),
                _ => default,
            };
            if let Some(v) = v {
                values.insert(key, v);
            }
        }
        for &(key, v) in overrides {
            values.insert(key, v);
        }
        Point {
            values,
            bomb: settings.bomb.or(schema.bomb),
            coupled: settings.coupled.or(schema.coupled),
            seed,
        }
    }

    fn row(self, p: &Point, with_mc: bool) -> CliResult<Vec<Cell>> {
        use Key::*;
        Ok(match self {
            Protocol::Ev => {
                let dist = ev_single_shot(p.get(R), p.object())?;
                let eta = match p.object() {
                    Some(_) => ev_report(&dist)?.efficiency(),
                    None => None,
                };
                vec![
                    num(p.get(R)),
                    t_cell(p),
                    num(dist.get("D1").unwrap_or(0.0)),
                    num(dist.get("D2").unwrap_or(0.0)),
                    num(dist.explosion_prob),
                    num(dist.residual_prob),
                    opt_num(eta),
                ]
            }
            Protocol::EvIterated => {
                let rep = ev_iterated(p.get(R))?;
                let mut row = vec![
                    num(p.get(R)),
                    num(rep.p_success),
                    num(rep.p_explosion),
                    opt_num(rep.efficiency()),
                ];
                if with_mc {
                    let trials = p.int(Trials);
                    row.push(Cell::from(trials));
                    if trials > 0 {
                        let mc = ev_iterated_monte_carlo(p.get(R), trials as u64, p.seed)?;
                        row.extend([num(mc.p_success()), num(mc.std_error()), num(mc.mean_shots())]);
                    } else {
                        row.extend((0..3).map(|_| Cell::Text(String::new())));
                    }
                }
                row
            }
            Protocol::Frontier => unreachable!("frontier rows come from the grid"),
            Protocol::Zeno => {
                let n = p.int(N);
                let mut cfg = ZenoConfig::new(n);
                if let Some(t) = p.object() {
                    cfg = cfg.with_object(t);
                }
                let run = zeno_ifm(&cfg)?;
                vec![
                    Cell::from(n),
                    t_cell(p),
                    num(run.report.p_success),
                    num(run.report.p_explosion),
                    num(run.report.p_inconclusive),
                    opt_num(run.report.efficiency()),
                ]
            }
            Protocol::Cavity => {
                let blocked = p.bomb.unwrap_or(false);
                let out = paul_pavicic(&CavityConfig {
                    mirror_reflectivity: p.get(MirrorR),
                    round_trips: p.int(M),
                    object_present: blocked,
                })?;
                vec![
                    num(p.get(MirrorR)),
                    Cell::from(p.int(M)),
                    Cell::Text(blocked.to_string()),
                    num(out.p_reflect),
                    num(out.p_transmit),
                    num(out.p_absorb),
                ]
            }
            Protocol::Renninger => {
                let (sectors, covered) = (p.int(Sectors), p.int(Covered));
                let state = uniform_sectors(sectors)?;
                let labels: Vec<String> = (0..covered).map(|k| format!("sector{k}")).collect();
                let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
                let (after, p_null) = negative_result_update(&state, &refs)?;
                let survivor = after.probability(&format!("sector{}", sectors - 1))?;
                vec![Cell::from(sectors), Cell::from(covered), num(p_null), num(survivor)]
            }
            Protocol::Dicke => {
                let s = dicke_energy_shift(p.int(NBasis))?;
                vec![
                    Cell::from(s.n_basis),
                    num(s.e_before),
                    num(s.e_after),
                    num(s.p_null),
                    num(s.captured_norm),
                ]
            }
            Protocol::Irradiation => {
                let t = Complex64::new(p.get(T), 0.0);
                let ev = irradiation_metric(IrradiationProtocol::BombTest { reflectivity: p.get(R) }, t)?;
                let zeno = irradiation_metric(IrradiationProtocol::Zeno { cycles: p.int(N) }, t)?;
                vec![num(p.get(T)), num(p.get(R)), Cell::from(p.int(N)), num(ev), num(zeno)]
            }
            Protocol::Nested => {
                let rep = nested_report(p)?;
                let c = rep.conditional;
                vec![
                    num(p.get(R)),
                    Cell::Text(rep.config.coupled.to_string()),
                    num(rep.p_both_dark),
                    opt_num(c.map(|c| c.object_in_working_area)),
                    opt_num(c.map(|c| c.photon_in_working_area)),
                    opt_num(c.map(|c| c.both_in_working_area)),
                ]
            }
        })
    }

    fn summarize(self, table: &Table) -> String {
        let row = &table.rows[0];
        let get = |col: &str| -> String {
            let cell = &row[table.column(col).expect("known column")];
            match cell {
                Cell::Num(x) => format_float(*x),
                Cell::Int(n) => n.to_string(),
                Cell::Text(s) if s.is_empty() => "undefined".into(),
                Cell::Text(s) => s.clone(),
            }
        };
        match self {
            Protocol::Ev => format!(
                "ev R={} t={}: D1 {}, D2 {}, explosion {}, eta {}",
                get("R"),
                get("t"),
                get("D1"),
                get("D2"),
                get("explosion"),
                get("eta")
            ),
            Protocol::EvIterated => {
                let mut s = format!(
                    "ev-iterated R={}: p_success {}, p_explosion {}, eta {}",
                    get("R"),
                    get("p_success"),
                    get("p_explosion"),
                    get("eta")
                );
                if table.column("mc_p_success").is_some() {
                    s.push_str(&format!(
                        ", monte carlo {} +- {} over {} trials",
                        get("mc_p_success"),
                        get("mc_std_error"),
                        get("trials")
                    ));
                }
                s
            }
            Protocol::Frontier => unreachable!("frontier has its own summary"),
            Protocol::Zeno => format!(
                "zeno N={} t={}: p_success {}, p_explosion {}, p_inconclusive {}, eta {}",
                get("N"),
                get("t"),
                get("p_success"),
                get("p_explosion"),
                get("p_inconclusive"),
                get("eta")
            ),
            Protocol::Cavity => format!(
                "cavity r={} M={} bomb={}: p_reflect {}, p_transmit {}, p_absorb {}",
                get("r"),
                get("M"),
                get("bomb"),
                get("p_reflect"),
                get("p_transmit"),
                get("p_absorb")
            ),
            Protocol::Renninger => format!(
                "renninger {} sectors, {} covered: p_null {}, each survivor {}",
                get("sectors"),
                get("covered"),
                get("p_null"),
                get("survivor_probability")
            ),
            Protocol::Dicke => format!(
                "dicke n_basis={}: e_before {}, e_after {}, p_null {}",
                get("n_basis"),
                get("e_before"),
                get("e_after"),
                get("p_null")
            ),
            Protocol::Irradiation => format!(
                "irradiation t={}: bomb test (R={}) {}, zeno (N={}) {} absorbed per detection",
                get("t"),
                get("R"),
                get("ev_metric"),
                get("N"),
                get("zeno_metric")
            ),
            Protocol::Nested => format!(
                "nested R={}: P(D2,D2) {}, given both dark: object {}, photon {}, both {}",
                get("R"),
                get("p_both_dark"),
                get("abl_object"),
                get("abl_photon"),
                get("abl_both")
            ),
        }
    }
}

fn check_range(key: Key, x: f64) -> CliResult<()> {
    let bad = |what: &str| {
        Err(CliError::Validation(format!("{key} = {} {what}", format_float(x))))
    };
    if !x.is_finite() {
        return bad("is not finite");
    }
    if key.is_integer() && (x < 0.0 || x.fract() != 0.0) {
        return bad("must be a non-negative integer");
    }
    match key {
        Key::R | Key::T if !(0.0..=1.0).contains(&x) => bad("outside [0, 1]"),
        Key::MirrorR if !(0.0..1.0).contains(&x) => bad("outside [0, 1)"),
        Key::N | Key::M | Key::NBasis | Key::Sectors if x < 1.0 => bad("must be at least 1"),
        _ => Ok(()),
    }
}

fn nested_report(p: &Point) -> CliResult<ifm::composite::NestedReport> {
    Ok(nested_ifm(NestedConfig {
        reflectivity: p.get(Key::R),
        coupled: p.coupled.unwrap_or(true),
    })?)
}

fn reject_grids(protocol: Protocol, settings: &Settings) -> CliResult<()> {
    if let Some((key, _)) = settings
        .values
        .iter()
        .find(|(_, s)| matches!(s, Setting::Grid(_)))
    {
        return Err(CliError::Validation(format!(
            "`{key}` is a grid; use `ifm sweep {}` to scan it",
            protocol.name()
        )));
    }
    Ok(())
}

pub fn run(protocol: Protocol, settings: &Settings) -> CliResult<Report> {
    protocol.validate(settings)?;
    let seed = settings.seed.unwrap_or(1);
    match protocol {
        Protocol::Frontier => {
            let grid = match settings.values.get(&Key::R) {
                Some(Setting::Grid(g)) => g.clone(),
                Some(Setting::Scalar(x)) => vec![*x],
                None => (1..20).map(|k| k as f64 / 20.0).collect(),
            };
            let frontier = efficiency_frontier(&grid)?;
            let mut table = Table::new(protocol.columns(false));
            for (r, eta) in &frontier.points {
                table.push(vec![num(*r), num(*eta)]);
            }
            let summary = match frontier.best {
                Some((r, eta)) => format!(
                    "frontier over {} points: best eta {} at R={}, decreasing in R: {}",
                    frontier.points.len(),
                    format_float(eta),
                    format_float(r),
                    frontier.monotone_decreasing
                ),
                None => "frontier: empty grid".to_string(),
            };
            Ok(Report {
                name: "frontier".into(),
                table,
                summary,
                x: Some("R".into()),
                ys: vec!["eta".into()],
            })
        }
        Protocol::Nested => {
            reject_grids(protocol, settings)?;
            let point = protocol.resolve(settings, &[], seed);
            let rep = nested_report(&point)?;
            let mut row_table = Table::new(protocol.columns(false));
            row_table.push(protocol.row(&point, false)?);
            Ok(Report {
                name: "nested".into(),
                table: rep.joint.to_table(),
                summary: protocol.summarize(&row_table),
                x: None,
                ys: Vec::new(),
            })
        }
        _ => {
            reject_grids(protocol, settings)?;
            let with_mc = protocol.has_mc(settings);
            let point = protocol.resolve(settings, &[], seed);
            let mut table = Table::new(protocol.columns(with_mc));
            table.push(protocol.row(&point, with_mc)?);
            let summary = protocol.summarize(&table);
            Ok(Report {
                name: protocol.name().into(),
                table,
                summary,
                x: Some(protocol.columns(with_mc)[0].into()),
                ys: protocol.plotted().iter().map(|s| s.to_string()).collect(),
            })
        }
    }
}

/// Runs one point per grid value, in parallel, rows in grid order. Point `i`
/// uses seed `seed + i`.
pub fn sweep(protocol: Protocol, settings: &Settings) -> CliResult<Report> {
    if protocol == Protocol::Frontier {
        return Err(CliError::Validation(
            "frontier already scans R; use `ifm run frontier --R <grid>`".into(),
        ));
    }
    protocol.validate(settings)?;
    let grids: Vec<(Key, &Vec<f64>)> = settings
        .values
        .iter()
        .filter_map(|(k, s)| match s {
            Setting::Grid(g) => Some((*k, g)),
            Setting::Scalar(_) => None,
        })
        .collect();
    let (key, grid) = match grids.as_slice() {
        [one] => *one,
        [] => {
            return Err(CliError::Validation(
                "sweep needs one parameter given as a grid, e.g. --N 1..200".into(),
            ))
        }
        _ => {
            return Err(CliError::Validation(
                "sweep scans exactly one parameter".into(),
            ))
        }
    };
    let seed = settings.seed.unwrap_or(1);
    let with_mc = protocol.has_mc(settings);
    let rows = grid
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let point = protocol.resolve(settings, &[(key, v)], seed.wrapping_add(i as u64));
            protocol.row(&point, with_mc)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut table = Table::new(protocol.columns(with_mc));
    for row in rows {
        table.push(row);
    }
    let primary = protocol.plotted()[0];
    let summary = match (table.rows.first(), table.rows.last()) {
        (Some(first), Some(last)) => {
            let col = table.column(primary).expect("known column");
            let show = |c: &Cell| c.as_f64().map_or_else(|| "undefined".into(), format_float);
            format!(
                "sweep {} over {key} ({} points): {primary} from {} to {}",
                protocol.name(),
                table.rows.len(),
                show(&first[col]),
                show(&last[col])
            )
        }
        _ => format!("sweep {} over {key}: empty grid", protocol.name()),
    };
    Ok(Report {
        name: format!("{}-sweep", protocol.name()),
        table,
        summary,
        x: Some(key.name().into()),
        ys: protocol.plotted().iter().map(|s| s.to_string()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for name in NAMES {
            assert_eq!(Protocol::from_str(name).unwrap().name(), name);
        }
        assert!(matches!(Protocol::from_str("bogus"), Err(CliError::UnknownProtocol(_))));
    }

    #[test]
    fn bomb_test_run() {
        let settings = Settings {
            bomb: Some(true),
            ..Settings::default()
        };
        let rep = run(Protocol::Ev, &settings).unwrap();
        assert_eq!(
            rep.summary,
            "ev R=0.5 t=0: D1 0.25, D2 0.25, explosion 0.5, eta 0.333333333333"
        );
        assert_eq!(rep.table.to_csv().lines().count(), 2);
    }

    #[test]
    fn foreign_parameter_rejected() {
        let mut settings = Settings::default();
        settings.values.insert(Key::M, Setting::Scalar(3.0));
        assert!(matches!(run(Protocol::Ev, &settings), Err(CliError::Validation(_))));
    }

    #[test]
    fn sweep_rows_follow_the_grid() {
        let mut settings = Settings::default();
        settings.values.insert(Key::N, Setting::Grid((1..=40).map(f64::from).collect()));
        let rep = sweep(Protocol::Zeno, &settings).unwrap();
        let n: Vec<f64> = rep.table.rows.iter().map(|r| r[0].as_f64().unwrap()).collect();
        assert_eq!(n, (1..=40).map(f64::from).collect::<Vec<_>>());
    }
}
