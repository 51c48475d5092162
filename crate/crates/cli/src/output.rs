//! CSV files and gnuplot scripts.

use std::fmt::Display;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Shortest round-trip text for `x`, in exponent form when very small or large.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

/// Writes `# compaction <kind> schema v1`, the column names, then one line per row.
pub fn write_csv<R, I>(path: &Path, kind: &str, columns: &[&str], rows: R) -> Result<(), CliError>
where
    R: IntoIterator<Item = I>,
    I: IntoIterator,
    I::Item: Display,
{
    let io = CliError::io(path);
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut out = BufWriter::new(file);
    let body = || -> std::io::Result<()> {
        writeln!(out, "# compaction {kind} schema v{SCHEMA_VERSION}")?;
        writeln!(out, "{}", columns.join(","))?;
        for row in rows {
            let fields: Vec<String> = row.into_iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", fields.join(","))?;
        }
        out.flush()
    };
    body().map_err(io)
}

/// `(file, [(x column, y column, title)])`.
pub type Panel<'a> = (&'a str, &'a [(usize, usize, &'a str)]);

/// A gnuplot script with one `plot` command per panel.
pub fn gnuplot_script(title: &str, panels: &[Panel]) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set datafile commentschars '#'\n");
    s.push_str(&format!(
        "set multiplot layout {},1 title '{title}'\n",
        panels.len()
    ));
    for (file, series) in panels {
        let curves: Vec<String> = series
            .iter()
            .map(|(x, y, t)| format!("'{file}' every ::1 using {x}:{y} with lines title '{t}'"))
            .collect();
        s.push_str(&format!("plot {}\n", curves.join(", \\\n     ")));
    }
    s.push_str("unset multiplot\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_schema_line_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        write_csv(
            &path,
            "timeseries",
            &["t", "h"],
            [[0.0, 0.1], [0.5, 2.5e-11]].map(|r| r.map(num)),
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "# compaction timeseries schema v1\nt,h\n0,0.1\n0.5,2.5e-11\n"
        );
    }

    #[test]
    fn numbers_round_trip() {
        for x in [
            0.0,
            1.0,
            -0.25,
            2.1030399643962028e-11,
            3.5e20,
            f64::MIN_POSITIVE,
            0.1 + 0.2,
        ] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(num(2.5e-11), "2.5e-11");
        assert_eq!(num(0.125), "0.125");
    }

    #[test]
    fn script_references_files() {
        let s = gnuplot_script(
            "run",
            &[
                ("timeseries.csv", &[(1, 2, "h")]),
                ("profile.csv", &[(1, 2, "phi"), (1, 3, "psi")]),
            ],
        );
        assert!(s.contains("layout 2,1"));
        assert!(s.contains("'profile.csv' every ::1 using 1:3"));
    }
}
