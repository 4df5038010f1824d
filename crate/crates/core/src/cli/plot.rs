//! Gnuplot scripts for survival curves, opinion snapshots and profiles.
//! Scripts sit next to their data and name it by relative path.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiments::read_fits;

#[derive(Debug, Clone, PartialEq)]
pub enum PlotKind {
    /// `curves.csv` and `fits.csv`.
    Survival { curves: PathBuf, fits: PathBuf },
    /// A vertex file from a graph export and an "id spin" snapshot.
    Snapshot { vertices: PathBuf, snapshot: PathBuf },
    /// A half-space or radial profile CSV.
    Profile { profile: PathBuf },
}

fn header(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path)?;
    Ok(text.lines().next().unwrap_or("").split(',').map(|s| s.trim().to_string()).collect())
}

fn require(path: &Path, cols: &[&str]) -> Result<()> {
    let h = header(path)?;
    for c in cols {
        if !h.iter().any(|x| x == c) {
            return Err(Error::MissingColumn(c.to_string()));
        }
    }
    Ok(())
}

fn name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Write the script as `out` and return the files it wrote (the script, plus
/// a merged point file for snapshots).
pub fn emit_plot_script(kind: &PlotKind, out: &Path) -> Result<Vec<PathBuf>> {
    let dir = out.parent().unwrap_or(Path::new(""));
    let mut s = String::from("set datafile separator ','\nset key outside right\n");
    let mut written = Vec::new();
    match kind {
        PlotKind::Survival { curves, fits } => {
            require(curves, &["tau", "s", "p_hat"])?;
            let fits = read_fits(fits)?;
            let _ = writeln!(s, "set xlabel 's'\nset ylabel 'survival probability'\nset yrange [-0.02:1.02]");
            let mut parts = Vec::new();
            for (i, f) in fits.iter().enumerate() {
                let _ = writeln!(s, "p{i}(x) = 1/(1 + exp(-(x - ({:.16e}))/({:.16e})))", f.s0, f.b);
                parts.push(format!(
                    "'{}' using 2:(abs($1 - {:.16e}) < 1e-12 ? $5 : 1/0) with points lc {} title 'tau = {}'",
                    name(curves),
                    f.tau,
                    i + 1,
                    f.tau
                ));
                if f.b.is_finite() && f.s0.is_finite() {
                    parts.push(format!("p{i}(x) with lines lc {} notitle", i + 1));
                }
            }
            let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
        }
        PlotKind::Snapshot { vertices, snapshot } => {
            let points = merge_snapshot(vertices, snapshot)?;
            let merged = dir.join(format!("{}.xy", name(snapshot)));
            fs::write(&merged, points)?;
            written.push(merged.clone());
            let _ = writeln!(s, "set datafile separator whitespace\nset size ratio -1\nunset key");
            let _ = writeln!(
                s,
                "plot '{0}' using 1:($3 < 0 ? $2 : 1/0) with dots lc rgb 'red', \\\n     '{0}' using 1:($3 > 0 ? $2 : 1/0) with points pt 7 ps 0.3 lc rgb 'blue'",
                name(&merged)
            );
        }
        PlotKind::Profile { profile } => {
            let h = header(profile)?;
            let (x, y) = if h.iter().any(|c| c == "rho") { ("rho", "g") } else { ("z", "f") };
            require(profile, &["w", x, y])?;
            let weights = profile_weights(profile)?;
            let picks = [0, weights.len() / 2, weights.len() - 1];
            let _ = writeln!(s, "set xlabel '{x}'\nset ylabel '{y}'");
            let parts: Vec<String> = picks
                .iter()
                .map(|&i| {
                    format!(
                        "'{}' using 2:(abs($1 - {:.16e}) <= 1e-12 * {:.16e} ? $3 : 1/0) with lines title 'w = {:.4}'",
                        name(profile),
                        weights[i],
                        weights[i],
                        weights[i]
                    )
                })
                .collect();
            let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
        }
    }
    fs::write(out, s)?;
    written.insert(0, out.to_path_buf());
    Ok(written)
}

fn profile_weights(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut ws: Vec<f64> = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        let w: f64 = line.split(',').next().and_then(|s| s.trim().parse().ok()).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            msg: "bad weight".into(),
        })?;
        if ws.last() != Some(&w) {
            ws.push(w);
        }
    }
    if ws.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: "empty profile".into(),
        });
    }
    Ok(ws)
}

/// "x y spin" lines from a vertex file and a snapshot.
fn merge_snapshot(vertices: &Path, snapshot: &Path) -> Result<String> {
    let spins = crate::dynamics::OpinionConfig::read_snapshot(snapshot)?;
    let text = fs::read_to_string(vertices)?;
    let mut out = String::new();
    for (n, line) in text.lines().enumerate() {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() < 4 {
            return Err(Error::MissingColumn("x1".into()));
        }
        let spin = spins.get(n).ok_or_else(|| Error::Parse {
            path: snapshot.to_path_buf(),
            line: spins.len() + 1,
            msg: "snapshot shorter than vertex file".into(),
        })?;
        let _ = writeln!(out, "{} {} {spin}", f[2], f[3]);
    }
    Ok(out)
}
