use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::CliResult;

/// Shortest text that round-trips exactly: 17 significant digits.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `# comment`, a header row and the data rows.
pub fn write_table(path: &Path, comment: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# {comment}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let x = 0.1 + 0.2;
        write_table(&path, "qmc-ltft test a=1", &["name", "x"], &[vec!["p,q".into(), float(x)]]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# qmc-ltft test a=1"));
        assert_eq!(lines.next(), Some("name,x"));
        let row = lines.next().unwrap();
        assert!(row.starts_with("\"p,q\","));
        assert_eq!(row.rsplit(',').next().unwrap().parse::<f64>().unwrap(), x);
    }
}
