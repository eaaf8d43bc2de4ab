//! `ifm`: run interaction-free measurement protocols from the command line.

mod error;
mod output;
mod params;
mod protocols;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use ifm::scenario::Scenario;
use ifm::tsvf::two_state;

use error::{CliError, CliResult};
use params::{Format, ParamFlags};
use protocols::{Protocol, Report};

#[derive(Debug, Parser)]
#[command(name = "ifm", version, about = "Interaction-free measurement simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a protocol at one parameter point.
    Run {
        /// ev, ev-iterated, frontier, zeno, cavity, renninger, dicke,
        /// irradiation or nested. May come from the config file instead.
        protocol: Option<String>,
        #[command(flatten)]
        params: ParamFlags,
    },
    /// Run a protocol over a grid of one parameter.
    Sweep {
        protocol: Option<String>,
        #[command(flatten)]
        params: ParamFlags,
    },
    /// Trace map |forward · backward| of a scenario file.
    Trace {
        scenario: PathBuf,
        /// Detector to post-select on; defaults to the scenario's `postselect`.
        #[arg(long)]
        postselect: Option<String>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Nested measurement: joint detector statistics of photon and object.
    Nested {
        #[command(flatten)]
        params: ParamFlags,
    },
}

fn protocol_of(positional: Option<String>, file: Option<String>) -> CliResult<Protocol> {
    let name = positional
        .or(file)
        .ok_or_else(|| CliError::Usage("no protocol given (argument or `protocol` key)".into()))?;
    Protocol::from_str(&name)
}

fn emit_report(report: &Report, format: Option<Format>, out: Option<&Path>) -> CliResult<()> {
    let format = format.unwrap_or(Format::Csv);
    let body = match format {
        Format::Csv => report.table.to_csv(),
        Format::Text => output::to_text(&report.table),
        Format::Svg => {
            let x = report.x.as_deref().ok_or_else(|| {
                CliError::Validation(format!("no svg plot for `{}` results", report.name))
            })?;
            output::to_svg(&report.table, x, &report.ys)?
        }
    };
    let dest = output::destination(out, &report.name, format);
    output::emit(&body, dest.as_deref(), &report.summary)
}

fn trace(
    path: &Path,
    postselect: Option<String>,
    format: Option<Format>,
    out: Option<&Path>,
) -> CliResult<()> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let scenario = Scenario::from_toml(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if scenario.partner.is_some() {
        return Err(CliError::Validation(
            "trace maps need a single-particle scenario".into(),
        ));
    }
    let post = postselect
        .or_else(|| scenario.postselect.clone())
        .ok_or_else(|| CliError::Usage("no detector to post-select on; pass --postselect".into()))?;
    let input = scenario.photon.input_state();
    let rec = two_state(&scenario.photon.circuit, &input, &post)?;
    let map = rec.trace_map();
    let cells = map.space().size() * map.n_slices();
    let vanishing = map
        .space()
        .labels()
        .iter()
        .flat_map(|m| (0..map.n_slices()).map(move |t| (m, t)))
        .filter(|(m, t)| map.get(m, *t).map(|v| v < 1e-12).unwrap_or(false))
        .count();
    let name = scenario.name.clone().unwrap_or_else(|| "scenario".into());
    let summary = format!(
        "trace {name}: post-selected on {post} (probability {}), {vanishing} of {cells} cells vanish",
        ifm::table::format_float(rec.postselection_probability())
    );
    let format = format.unwrap_or(Format::Csv);
    let body = match format {
        Format::Csv => map.to_csv(),
        Format::Text => output::to_text(&map.to_table()),
        Format::Svg => {
            return Err(CliError::Validation(
                "trace maps are emitted as csv or text".into(),
            ))
        }
    };
    let dest = output::destination(out, "trace", format);
    output::emit(&body, dest.as_deref(), &summary)
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { protocol, params } => {
            let settings = params::merge(&params)?;
            let protocol = protocol_of(protocol, settings.protocol.clone())?;
            let report = protocols::run(protocol, &settings)?;
            emit_report(&report, settings.format, settings.out.as_deref())
        }
        Command::Sweep { protocol, params } => {
            let settings = params::merge(&params)?;
            let protocol = protocol_of(protocol, settings.protocol.clone())?;
            let report = protocols::sweep(protocol, &settings)?;
            emit_report(&report, settings.format, settings.out.as_deref())
        }
        Command::Nested { params } => {
            let settings = params::merge(&params)?;
            if let Some(p) = settings.protocol.as_deref().filter(|p| *p != "nested") {
                return Err(CliError::Config(format!(
                    "config names protocol `{p}`, expected `nested`"
                )));
            }
            let report = protocols::run(Protocol::Nested, &settings)?;
            emit_report(&report, settings.format, settings.out.as_deref())
        }
        Command::Trace {
            scenario,
            postselect,
            format,
            out,
        } => trace(&scenario, postselect, format, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ifm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
