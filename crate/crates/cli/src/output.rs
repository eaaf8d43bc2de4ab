use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use ifm::table::{format_float, Cell, Table};

use crate::error::{CliError, CliResult};
use crate::params::Format;

pub const OUT_DIR_VAR: &str = "IFM_OUT_DIR";

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn render_cell(cell: &Cell) -> String {
    match cell {
        Cell::Num(x) => format_float(*x),
        Cell::Int(n) => n.to_string(),
        Cell::Text(s) => s.clone(),
    }
}

/// Space-aligned columns, one header line.
pub fn to_text(table: &Table) -> String {
    let cells: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| r.iter().map(render_cell).collect())
        .collect();
    let widths: Vec<usize> = table
        .columns
        .iter()
        .enumerate()
        .map(|(i, c)| cells.iter().map(|r| r[i].len()).chain([c.len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let line = |out: &mut String, items: &mut dyn Iterator<Item = &str>| {
        let padded: Vec<String> = items
            .zip(&widths)
            .map(|(s, w)| format!("{s:>w$}"))
            .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(&mut out, &mut table.columns.iter().map(String::as_str));
    for row in &cells {
        line(&mut out, &mut row.iter().map(String::as_str));
    }
    out
}

fn padded_range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return None;
    }
    if hi > lo {
        Some((lo, hi))
    } else {
        let pad = if lo == 0.0 { 0.5 } else { lo.abs() * 0.1 };
        Some((lo - pad, hi + pad))
    }
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line plot of the `ys` columns against `x`.
pub fn to_svg(table: &Table, x: &str, ys: &[String]) -> CliResult<String> {
    if table.is_empty() {
        return Err(CliError::Validation("refusing to plot an empty result".into()));
    }
    let xi = table
        .column(x)
        .ok_or_else(|| CliError::Validation(format!("no column `{x}` to plot against")))?;
    let series: Vec<(&str, Vec<(f64, f64)>)> = ys
        .iter()
        .filter_map(|y| table.column(y).map(|i| (y.as_str(), i)))
        .map(|(name, yi)| {
            let pts = table
                .rows
                .iter()
                .filter_map(|r| Some((r[xi].as_f64()?, r[yi].as_f64()?)))
                .filter(|(a, b)| a.is_finite() && b.is_finite())
                .collect();
            (name, pts)
        })
        .collect();
    let all = || series.iter().flat_map(|(_, p)| p.iter().copied());
    let (Some((x0, x1)), Some((y0, y1))) = (
        padded_range(all().map(|p| p.0)),
        padded_range(all().map(|p| p.1)),
    ) else {
        return Err(CliError::Validation("nothing numeric to plot".into()));
    };
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |v: f64| LEFT + (v - x0) / (x1 - x0) * pw;
    let sy = |v: f64| TOP + ph - (v - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (ax, ay) = (LEFT, TOP + ph);
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="black" points="{ax:.2},{TOP:.2} {ax:.2},{ay:.2} {:.2},{ay:.2}"/>"#,
        LEFT + pw
    );
    let labels = [
        (ax, ay + 16.0, "middle", format_float(x0)),
        (LEFT + pw, ay + 16.0, "middle", format_float(x1)),
        (ax - 6.0, ay, "end", format_float(y0)),
        (ax - 6.0, TOP + 4.0, "end", format_float(y1)),
    ];
    for (lx, ly, anchor, text) in labels {
        let _ = writeln!(
            s,
            r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="{anchor}">{text}</text>"#
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        escape_xml(x)
    );
    let y_label: Vec<&str> = series.iter().map(|(n, _)| *n).collect();
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape_xml(&y_label.join(", "))
    );
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let coords: Vec<String> = pts
            .iter()
            .map(|&(a, b)| format!("{:.2},{:.2}", sx(a), sy(b)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.5"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape_xml(name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Where an artifact goes: the explicit path, else the output directory
/// from the environment, else stdout (`None`).
pub fn destination(out: Option<&Path>, stem: &str, format: Format) -> Option<PathBuf> {
    if let Some(p) = out {
        return Some(p.to_path_buf());
    }
    let dir = std::env::var_os(OUT_DIR_VAR).filter(|d| !d.is_empty())?;
    Some(PathBuf::from(dir).join(format!("{stem}.{}", format.extension())))
}

/// Writes `body` to `dest` or stdout, then the summary line: to stdout when
/// the artifact went to a file, to stderr when it went to stdout.
pub fn emit(body: &str, dest: Option<&Path>, summary: &str) -> CliResult<()> {
    match dest {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| {
                    CliError::Io(format!("cannot create {}: {e}", parent.display()))
                })?;
            }
            std::fs::write(path, body)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
            println!("{summary}");
            eprintln!("wrote {}", path.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Table {
        let mut t = Table::new(["N", "p"]);
        for n in 1..=5usize {
            t.push(vec![Cell::from(n), Cell::Num(1.0 - 1.0 / n as f64)]);
        }
        t
    }

    #[test]
    fn svg_is_stable_and_complete() {
        let a = to_svg(&table(), "N", &["p".into()]).unwrap();
        let b = to_svg(&table(), "N", &["p".into()]).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains(">N</text>"));
    }

    #[test]
    fn empty_svg_refused() {
        let t = Table::new(["N", "p"]);
        assert!(to_svg(&t, "N", &["p".into()]).is_err());
    }

    #[test]
    fn text_alignment() {
        let text = to_text(&table());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "N               p");
    }
}
