use std::io::Write;
use std::path::Path;

use super::ScenarioError;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ScenarioError + '_ {
    move |source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `contents` to a temporary file next to `path` and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), ScenarioError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(contents).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| io_err(path)(e.error))?;
    Ok(())
}

/// Parses a numeric CSV with one header line. Lines starting with `#` are
/// skipped. Returns the header names and the columns.
pub fn read_csv_columns(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), ScenarioError> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| ScenarioError::Data("CSV has no header".into()))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut cols = vec![Vec::new(); header.len()];
    for (n, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(ScenarioError::Data(format!(
                "row {} has {} fields, header has {}",
                n + 1,
                fields.len(),
                header.len()
            )));
        }
        for (c, f) in fields.iter().enumerate() {
            let v = f.trim().parse::<f64>().map_err(|_| {
                ScenarioError::Data(format!("row {}: {:?} is not a number", n + 1, f))
            })?;
            cols[c].push(v);
        }
    }
    Ok((header, cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.csv");
        write_atomic(&p, b"a").unwrap();
        write_atomic(&p, b"bc").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"bc");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn csv_round_trip() {
        let (h, c) = read_csv_columns("# note\nx,y\n1,2\n3e0, -4.5\n").unwrap();
        assert_eq!(h, ["x", "y"]);
        assert_eq!(c, vec![vec![1.0, 3.0], vec![2.0, -4.5]]);
        assert!(read_csv_columns("x,y\n1\n").is_err());
        assert!(read_csv_columns("x\nfoo\n").is_err());
        assert!(read_csv_columns("").is_err());
    }
}
