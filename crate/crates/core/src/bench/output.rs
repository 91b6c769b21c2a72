//! Text artifacts. Every function returns the file contents; callers own I/O.
//!
//! Floats use `{:.5e}` (six significant digits), lines end in `\n`, and header
//! lines start with `# `.

use std::fmt::Write;

use super::{CellRecord, ErrorReport, ExperimentConfig};
use crate::reconstruct::Family;
use crate::windows::WindowKind;

/// Windows in the order used by tables and figure columns.
pub const FIGURE_WINDOWS: [WindowKind; 3] = [WindowKind::None, WindowKind::Gaussian, WindowKind::Sinh];

/// Header lines recording the resolved config and build identifier.
pub fn config_header(config: &ExperimentConfig, profile: Option<&str>, build_id: &str) -> Vec<String> {
    let mut lines = vec![format!("build: {build_id}")];
    if let Some(p) = profile {
        lines.push(format!("profile: {p}"));
    }
    lines.push(format!("config: {}", serde_json::to_string(config).expect("config serializes to JSON")));
    lines
}

fn push_header(out: &mut String, header: &[String]) {
    for line in header {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
}

fn sci(x: f64) -> String {
    format!("{x:.5e}")
}

/// One row per completed cell.
pub fn report_csv(report: &ErrorReport, header: &[String]) -> String {
    let mut out = String::new();
    push_header(&mut out, header);
    out.push_str("family,window,delta,N,M,trials,mean_max_error,bound_main,out_of_theory\n");
    for c in &report.cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            c.family,
            c.window,
            sci(c.delta),
            c.n_half,
            c.period,
            c.trials,
            sci(c.mean_max_error),
            sci(c.bound_main),
            c.out_of_theory
        )
        .unwrap();
    }
    out
}

/// Full report (config, per-trial errors, failures) plus the header lines.
pub fn report_json(report: &ErrorReport, header: &[String]) -> String {
    let doc = serde_json::json!({ "meta": header, "report": report });
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes to JSON");
    s.push('\n');
    s
}

fn table_cell(report: &ErrorReport, family: Family, window: WindowKind, delta: f64, n: usize) -> (String, bool) {
    match report.cell(family, window, delta, n) {
        Some(CellRecord { mean_max_error, out_of_theory, .. }) => (sci(*mean_max_error), *out_of_theory),
        None if report.config.windows.contains(&window) && report.config.families.contains(&family) => {
            ("failed".into(), false)
        }
        None => (String::new(), false),
    }
}

fn column_label(family: Family, window: WindowKind) -> String {
    let w = match window {
        WindowKind::None => "no",
        WindowKind::Gaussian => "gaussian",
        WindowKind::Sinh => "sinh",
    };
    match family {
        Family::NonPeriodic => w.to_string(),
        Family::Periodic => format!("periodic-{w}"),
    }
}

/// The paired layout `N, no, gaussian, sinh | N, periodic-no, periodic-gaussian,
/// periodic-sinh` for one bandwidth. Row `i` pairs the `i`-th non-periodic and
/// periodic `N`; the trailing column lists the out-of-theory cells of the row.
pub fn table_csv(report: &ErrorReport, delta: f64, header: &[String]) -> String {
    let cfg = &report.config;
    let mut out = String::new();
    push_header(&mut out, header);
    out.push_str("N,no,gaussian,sinh,N_periodic,periodic-no,periodic-gaussian,periodic-sinh,out_of_theory\n");
    let rows = cfg.n_values.len().max(cfg.periodic_n_values.len());
    for i in 0..rows {
        let mut fields = Vec::with_capacity(9);
        let mut flagged = Vec::new();
        for (family, ns) in [(Family::NonPeriodic, &cfg.n_values), (Family::Periodic, &cfg.periodic_n_values)] {
            match ns.get(i) {
                Some(&n) => {
                    fields.push(n.to_string());
                    for w in FIGURE_WINDOWS {
                        let (text, oot) = table_cell(report, family, w, delta, n);
                        if oot {
                            flagged.push(column_label(family, w));
                        }
                        fields.push(text);
                    }
                }
                None => fields.extend(std::iter::repeat_n(String::new(), 4)),
            }
        }
        fields.push(flagged.join(";"));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Long-format plot data for one family: `N, delta, log10` mean error per
/// window, `log10` of the main bound term.
pub fn figure_csv(report: &ErrorReport, family: Family, header: &[String]) -> String {
    let cfg = &report.config;
    let ns = match family {
        Family::NonPeriodic => &cfg.n_values,
        Family::Periodic => &cfg.periodic_n_values,
    };
    let mut out = String::new();
    push_header(&mut out, header);
    out.push_str("N,delta,log10_no,log10_gaussian,log10_sinh,log10_bound,out_of_theory\n");
    for &delta in &cfg.deltas {
        for &n in ns {
            let mut row = vec![n.to_string(), sci(delta)];
            let mut oot = false;
            let mut bound = None;
            for w in FIGURE_WINDOWS {
                match report.cell(family, w, delta, n) {
                    Some(c) => {
                        row.push(format!("{:.6}", c.mean_max_error.log10()));
                        oot |= c.out_of_theory;
                        bound = Some(c.bound_main);
                    }
                    None => row.push(String::new()),
                }
            }
            let bound = bound.unwrap_or_else(|| super::bound_main(family, n, cfg.m_period, delta));
            row.push(format!("{:.6}", bound.log10()));
            row.push(oot.to_string());
            out.push_str(&row.join(","));
            out.push('\n');
        }
    }
    out
}

/// Sidecar log of failed cells, one line each.
pub fn failure_log(report: &ErrorReport, header: &[String]) -> String {
    let mut out = String::new();
    push_header(&mut out, header);
    for f in &report.failures {
        writeln!(
            out,
            "{} {} delta={} N={} trial={}: {}",
            f.family,
            f.window,
            sci(f.delta),
            f.n_half,
            f.trial,
            f.message
        )
        .unwrap();
    }
    out
}
