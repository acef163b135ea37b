use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

pub const HISTORY_HEADER: &str = "method,m,n,seed,iter,residual";
pub const APP_HEADER: &str = "app,param-set,iters,wall_s,psnr_db,residual";
pub const APP_HISTORY_HEADER: &str = "app,param-set,iter,residual";

/// Runtime per method against size, and the residual histories.
const BENCH_PLOT: &str = r#"# gnuplot template; run with: gnuplot {stem}.gp
set datafile separator ","
set key outside right
set logscale y
set terminal pngcairo size 900,600
set output "{stem}-runtime.png"
set xlabel "n"
set ylabel "wall time (s)"
methods = system("tail -n +2 {csv} | cut -d, -f1 | sort -u | tr '\n' ' '")
plot for [m in methods] "< grep '^".m.",' {csv}" using 3:6 with linespoints title m
set output "{stem}-history.png"
set xlabel "iteration"
set ylabel "monitored residual"
plot for [m in methods] "< grep '^".m.",' {history}" using 5:6 with lines title m
"#;

/// Residual per round or iteration for the application runs.
const APP_PLOT: &str = r#"# gnuplot template; run with: gnuplot {stem}.gp
set datafile separator ","
set key outside right
set logscale y
set terminal pngcairo size 900,600
set output "{stem}-history.png"
set xlabel "iteration"
set ylabel "residual"
sets = system("tail -n +2 {history} | cut -d, -f2 | sort -u | tr '\n' ' '")
plot for [s in sets] "< grep ',".s.",' {history}" using 3:4 with lines title s
"#;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Bench,
    App,
    None,
}

/// CSV text produced by one command plus its side files.
#[derive(Debug, Default)]
pub struct Outputs {
    header: String,
    rows: Vec<String>,
    history_header: String,
    history: Vec<String>,
    warnings: Vec<String>,
}

impl Outputs {
    pub fn new(header: &str, history_header: &str) -> Self {
        Self { header: header.into(), history_header: history_header.into(), ..Default::default() }
    }

    pub fn push_row(&mut self, row: String) {
        self.rows.push(row);
    }

    pub fn push_history(&mut self, row: String) {
        self.history.push(row);
    }

    pub fn warn(&mut self, msg: String) {
        self.warnings.push(msg);
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn csv(&self) -> String {
        join(&self.header, &self.rows)
    }

    pub fn history_csv(&self) -> String {
        join(&self.history_header, &self.history)
    }

    /// Writes the CSV to `out` (stdout when absent). With a path, a non-empty
    /// history goes to `<stem>.history.csv` and the plot template to `<stem>.gp`.
    pub fn emit(&self, out: Option<&Path>, plot: PlotKind) -> Result<(), CliError> {
        for w in &self.warnings {
            eprintln!("warning: {w}");
        }
        let Some(path) = out else {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(self.csv().as_bytes()).map_err(CliError::io)?;
            return Ok(());
        };
        write(path, self.csv())?;
        if self.history.is_empty() || plot == PlotKind::None {
            return Ok(());
        }
        let history = sibling(path, ".history.csv");
        write(&history, self.history_csv())?;
        let template = if plot == PlotKind::Bench { BENCH_PLOT } else { APP_PLOT };
        let name = |p: &Path| p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let script = template
            .replace("{stem}", &stem(path))
            .replace("{csv}", &name(path))
            .replace("{history}", &name(&history));
        write(&sibling(path, ".gp"), script)
    }
}

fn join(header: &str, rows: &[String]) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(header);
    s.push('\n');
    for r in rows {
        s.push_str(r);
        s.push('\n');
    }
    s
}

fn write(path: &Path, contents: String) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Runtime(anyhow::anyhow!("writing {}: {e}", path.display())))
}

pub(crate) fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into())
}

/// `dir/<stem><suffix>` next to `path`.
pub(crate) fn sibling(path: &Path, suffix: &str) -> PathBuf {
    path.with_file_name(format!("{}{suffix}", stem(path)))
}

/// Drops the `wall_s` column so two runs can be compared byte for byte.
pub fn strip_column(csv: &str, column: &str) -> String {
    let mut lines = csv.lines();
    let Some(header) = lines.next() else { return String::new() };
    let idx = header.split(',').position(|h| h == column);
    let drop = |line: &str| match idx {
        Some(i) => line.split(',').enumerate().filter(|&(j, _)| j != i).map(|(_, f)| f).collect::<Vec<_>>().join(","),
        None => line.to_string(),
    };
    std::iter::once(header).chain(lines).map(drop).collect::<Vec<_>>().join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_removes_named_column() {
        let csv = "a,wall_s,b\n1,0.5,2\n3,0.7,4\n";
        assert_eq!(strip_column(csv, "wall_s"), "a,b\n1,2\n3,4");
        assert_eq!(strip_column(csv, "zzz"), "a,wall_s,b\n1,0.5,2\n3,0.7,4");
    }

    #[test]
    fn siblings_share_the_stem() {
        let p = Path::new("/tmp/x/run.csv");
        assert_eq!(sibling(p, ".gp"), Path::new("/tmp/x/run.gp"));
        assert_eq!(sibling(p, ".history.csv"), Path::new("/tmp/x/run.history.csv"));
    }
}
