use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{SweepResult, SweepRow, SweepVariable};
use crate::agents::AgentKind;
use crate::error::{CoexError, Result};

pub const CSV_HEADER: &str = "sweep_variable,sweep_value,agent,seed,mean_throughput,std_throughput,wall_time_s";

#[derive(Debug, Serialize, Deserialize)]
struct CsvRecord {
    sweep_variable: SweepVariable,
    sweep_value: usize,
    agent: AgentKind,
    seed: u64,
    mean_throughput: f64,
    std_throughput: f64,
    wall_time_s: f64,
}

fn csv_err(e: csv::Error) -> CoexError {
    CoexError::Parse(e.to_string())
}

pub fn to_csv(result: &SweepResult) -> Result<String> {
    if result.rows.is_empty() {
        return Err(CoexError::Precondition("no rows to write".into()));
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    for r in &result.rows {
        w.serialize(CsvRecord {
            sweep_variable: result.sweep_variable,
            sweep_value: r.sweep_value,
            agent: r.agent,
            seed: r.seed,
            mean_throughput: r.mean_throughput,
            std_throughput: r.std_throughput,
            wall_time_s: r.wall_time_s,
        })
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CoexError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

pub fn parse_csv(text: &str) -> Result<SweepResult> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_err)?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(CoexError::Parse(format!("unexpected header '{header}'")));
    }
    let mut variable = None;
    let mut rows = vec![];
    for rec in r.deserialize::<CsvRecord>() {
        let rec = rec.map_err(csv_err)?;
        if *variable.get_or_insert(rec.sweep_variable) != rec.sweep_variable {
            return Err(CoexError::Parse("mixed sweep variables in one file".into()));
        }
        rows.push(SweepRow {
            sweep_value: rec.sweep_value,
            agent: rec.agent,
            seed: rec.seed,
            mean_throughput: rec.mean_throughput,
            std_throughput: rec.std_throughput,
            wall_time_s: rec.wall_time_s,
        });
    }
    let sweep_variable = variable.ok_or_else(|| CoexError::Parse("no rows".into()))?;
    Ok(SweepResult { sweep_variable, rows })
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let text = to_csv(result)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Matplotlib script plotting seed-averaged throughput against the sweep
/// value, one line per agent. The data is embedded; the script takes an
/// optional output image path.
pub fn plot_script(result: &SweepResult) -> Result<String> {
    if result.rows.is_empty() {
        return Err(CoexError::Precondition("no rows to plot".into()));
    }
    let mut values: Vec<usize> = result.rows.iter().map(|r| r.sweep_value).collect();
    values.dedup();
    let mut agents: Vec<AgentKind> = vec![];
    for r in &result.rows {
        if !agents.contains(&r.agent) {
            agents.push(r.agent);
        }
    }
    let (xlabel, title) = match result.sweep_variable {
        SweepVariable::LaaUe => ("Number of LAA UEs", "Throughput vs number of LAA UEs"),
        SweepVariable::WifiAp => ("Number of Wi-Fi APs", "Throughput vs number of Wi-Fi APs"),
    };
    let mut s = String::new();
    let _ = writeln!(s, "#!/usr/bin/env python3");
    let _ = writeln!(s, "# Generated by coex-sim. Usage: python3 <this file> [output.png]");
    let _ = writeln!(s, "import sys");
    let _ = writeln!(s, "import matplotlib");
    let _ = writeln!(s, "matplotlib.use(\"Agg\")");
    let _ = writeln!(s, "import matplotlib.pyplot as plt\n");
    let _ = writeln!(s, "x = {values:?}");
    let _ = writeln!(s, "series = {{");
    for a in &agents {
        let ys: Vec<String> = values
            .iter()
            .map(|&v| result.seed_mean(v, *a).map_or("float(\"nan\")".to_string(), |m| format!("{m:?}")))
            .collect();
        let _ = writeln!(s, "    \"{}\": [{}],", a.name(), ys.join(", "));
    }
    let _ = writeln!(s, "}}\n");
    let _ = writeln!(s, "fig, ax = plt.subplots(figsize=(7, 4.5))");
    let _ = writeln!(s, "for name, ys in series.items():");
    let _ = writeln!(s, "    ax.plot(x, ys, marker=\"o\", label=name)");
    let _ = writeln!(s, "ax.set_xlabel(\"{xlabel}\")");
    let _ = writeln!(s, "ax.set_ylabel(\"Total normalized throughput\")");
    let _ = writeln!(s, "ax.set_title(\"{title}\")");
    let _ = writeln!(s, "ax.grid(True, alpha=0.3)");
    let _ = writeln!(s, "ax.legend()");
    let _ = writeln!(s, "fig.tight_layout()");
    let _ = writeln!(
        s,
        "fig.savefig(sys.argv[1] if len(sys.argv) > 1 else \"{}_sweep.png\", dpi=150)",
        result.sweep_variable.name()
    );
    Ok(s)
}

pub fn emit_plot_script(result: &SweepResult, path: &Path) -> Result<()> {
    std::fs::write(path, plot_script(result)?)?;
    Ok(())
}
