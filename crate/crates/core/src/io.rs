//! CSV readers and writers.
//!
//! Every file has a header row. Player ids in files are 1-based; in memory
//! they are 0-based. Floats are written with 17 significant digits so that
//! reading a file back reproduces the same `f64` values.
//!
//! | file       | header              | row meaning                          |
//! |------------|---------------------|--------------------------------------|
//! | edges      | `src,dst`           | `dst` is a friend of `src`           |
//! | covariates | `id,<name>,...`     | covariate values of player `id`      |
//! | outcomes   | `id,y`              | observed action of player `id`       |
//! | profile    | `id,p0,...,pK`      | choice probabilities of player `id`  |
//!
//! Schema problems are reported with the file, the 1-based data row and the
//! column where they apply.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{ChoiceProfile, Covariates};
use crate::network::DirectedNetwork;

/// How empty or `NA` covariate cells are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingPolicy {
    /// Missing values become 0.
    #[default]
    Zero,
    /// Missing values are a schema error.
    Error,
}

/// Formats a float with 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn schema(path: &Path, row: usize, column: Option<&str>, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_path_buf(),
        row,
        column: column.map(str::to_owned),
        message: message.into(),
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    if !e.is_io_error() {
        return Error::Csv {
            path: path.to_path_buf(),
            source: e,
        };
    }
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        _ => unreachable!("checked is_io_error"),
    }
}

struct Table {
    path: PathBuf,
    header: Vec<String>,
    rows: Vec<csv::StringRecord>,
}

fn read_table(path: &Path, expect: Option<&[&str]>) -> Result<Table> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.iter().all(String::is_empty) {
        return Err(schema(path, 0, None, "missing header row"));
    }
    if let Some(expect) = expect {
        if header != expect {
            return Err(schema(
                path,
                0,
                None,
                format!("header must be `{}`, found `{}`", expect.join(","), header.join(",")),
            ));
        }
    }
    let mut rows = Vec::new();
    for (r, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { .. } => schema(path, r + 1, None, "wrong number of fields"),
            _ => csv_err(path, e),
        })?;
        rows.push(rec);
    }
    Ok(Table {
        path: path.to_path_buf(),
        header,
        rows,
    })
}

impl Table {
    fn field(&self, row: usize, col: usize) -> &str {
        self.rows[row].get(col).unwrap_or("")
    }

    fn err(&self, row: usize, col: usize, message: impl Into<String>) -> Error {
        schema(&self.path, row + 1, Some(&self.header[col]), message)
    }

    /// A 1-based id converted to a 0-based index below `n`.
    fn id(&self, row: usize, col: usize, n: Option<usize>) -> Result<usize> {
        let raw = self.field(row, col);
        let id: usize = raw
            .parse()
            .map_err(|_| self.err(row, col, format!("`{raw}` is not a positive integer id")))?;
        if id == 0 {
            return Err(self.err(row, col, "ids start at 1"));
        }
        if let Some(n) = n {
            if id > n {
                return Err(self.err(row, col, format!("id {id} exceeds the {n} players")));
            }
        }
        Ok(id - 1)
    }

    fn float(&self, row: usize, col: usize) -> Result<Option<f64>> {
        let raw = self.field(row, col);
        if raw.is_empty() || raw.eq_ignore_ascii_case("na") || raw == "." {
            return Ok(None);
        }
        let v: f64 = raw
            .parse()
            .map_err(|_| self.err(row, col, format!("`{raw}` is not a number")))?;
        if !v.is_finite() {
            return Err(self.err(row, col, format!("`{raw}` is not finite")));
        }
        Ok(Some(v))
    }

    /// Rows keyed by the id column, requiring every id in `1..=n` exactly once.
    fn rows_by_id(&self, n: usize) -> Result<Vec<usize>> {
        if self.rows.len() != n {
            return Err(schema(
                &self.path,
                self.rows.len(),
                None,
                format!("expected {n} rows, found {}", self.rows.len()),
            ));
        }
        let mut slot = vec![usize::MAX; n];
        for r in 0..n {
            let id = self.id(r, 0, Some(n))?;
            if slot[id] != usize::MAX {
                return Err(self.err(r, 0, format!("id {} appears twice", id + 1)));
            }
            slot[id] = r;
        }
        Ok(slot)
    }
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::Writer::from_writer(file))
}

fn write_rows<I>(path: &Path, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the friend lists as `src,dst` rows in ascending order.
pub fn write_edges(path: &Path, net: &DirectedNetwork) -> Result<()> {
    let header = ["src".to_owned(), "dst".to_owned()];
    write_rows(
        path,
        &header,
        net.edges().map(|(i, j)| vec![(i + 1).to_string(), (j + 1).to_string()]),
    )
}

/// Reads an edge list for a network of `n` players.
pub fn read_edges(path: &Path, n: usize) -> Result<DirectedNetwork> {
    let table = read_table(path, Some(&["src", "dst"]))?;
    let mut friends = vec![Vec::new(); n];
    for r in 0..table.rows.len() {
        let i = table.id(r, 0, Some(n))?;
        let j = table.id(r, 1, Some(n))?;
        if i == j {
            return Err(table.err(r, 1, "self-friendship"));
        }
        if friends[i].contains(&j) {
            return Err(table.err(r, 1, format!("duplicate edge {} -> {}", i + 1, j + 1)));
        }
        friends[i].push(j);
    }
    DirectedNetwork::from_friend_lists(friends)
}

/// Writes covariates with header `id,<names>`.
pub fn write_covariates(path: &Path, names: &[String], x: &Covariates) -> Result<()> {
    if names.len() != x.d() {
        return Err(Error::Dimension(format!("{} names for {} columns", names.len(), x.d())));
    }
    let header: Vec<String> = std::iter::once("id".to_owned()).chain(names.iter().cloned()).collect();
    write_rows(
        path,
        &header,
        (0..x.n()).map(|i| {
            std::iter::once((i + 1).to_string())
                .chain(x.row(i).iter().map(|&v| format_float(v)))
                .collect()
        }),
    )
}

/// Reads covariates; the player count is the number of rows. Returns the
/// column names from the header.
pub fn read_covariates(path: &Path, missing: MissingPolicy) -> Result<(Vec<String>, Covariates)> {
    let table = read_table(path, None)?;
    if table.header.first().map(String::as_str) != Some("id") {
        return Err(schema(path, 0, None, "first column must be `id`"));
    }
    let names: Vec<String> = table.header[1..].to_vec();
    let n = table.rows.len();
    let d = names.len();
    let slot = table.rows_by_id(n)?;
    let mut data = vec![0.0; n * d];
    for (i, &r) in slot.iter().enumerate() {
        for c in 0..d {
            data[i * d + c] = match (table.float(r, c + 1)?, missing) {
                (Some(v), _) => v,
                (None, MissingPolicy::Zero) => 0.0,
                (None, MissingPolicy::Error) => return Err(table.err(r, c + 1, "missing value")),
            };
        }
    }
    Ok((names, Covariates::new(n, d, data)?))
}

/// Writes `id,y`.
pub fn write_outcomes(path: &Path, actions: &[usize]) -> Result<()> {
    let header = ["id".to_owned(), "y".to_owned()];
    write_rows(
        path,
        &header,
        actions
            .iter()
            .enumerate()
            .map(|(i, y)| vec![(i + 1).to_string(), y.to_string()]),
    )
}

/// Reads `id,y` for `n` players with actions in `0..=k`.
pub fn read_outcomes(path: &Path, n: usize, k: usize) -> Result<Vec<usize>> {
    let table = read_table(path, Some(&["id", "y"]))?;
    let slot = table.rows_by_id(n)?;
    let mut y = vec![0; n];
    for (i, &r) in slot.iter().enumerate() {
        let raw = table.field(r, 1);
        let v: usize = raw
            .parse()
            .map_err(|_| table.err(r, 1, format!("`{raw}` is not an action")))?;
        if v > k {
            return Err(table.err(r, 1, format!("action {v} outside 0..={k}")));
        }
        y[i] = v;
    }
    Ok(y)
}

/// Writes `id,p0,...,pK`.
pub fn write_profile(path: &Path, profile: &ChoiceProfile) -> Result<()> {
    let header: Vec<String> = std::iter::once("id".to_owned())
        .chain((0..=profile.k()).map(|k| format!("p{k}")))
        .collect();
    write_rows(
        path,
        &header,
        (0..profile.n()).map(|i| {
            std::iter::once((i + 1).to_string())
                .chain(profile.row(i).iter().map(|&v| format_float(v)))
                .collect()
        }),
    )
}

/// Reads a choice profile written by [`write_profile`].
pub fn read_profile(path: &Path) -> Result<ChoiceProfile> {
    let table = read_table(path, None)?;
    let actions = table.header.len().saturating_sub(1);
    let expect: Vec<String> = std::iter::once("id".to_owned())
        .chain((0..actions).map(|k| format!("p{k}")))
        .collect();
    if table.header != expect || actions < 2 {
        return Err(schema(path, 0, None, "header must be `id,p0,...,pK` with K >= 1"));
    }
    let n = table.rows.len();
    let slot = table.rows_by_id(n)?;
    let mut data = vec![0.0; n * actions];
    for (i, &r) in slot.iter().enumerate() {
        for c in 0..actions {
            data[i * actions + c] = table
                .float(r, c + 1)?
                .ok_or_else(|| table.err(r, c + 1, "missing probability"))?;
        }
    }
    ChoiceProfile::new(actions, data).map_err(|e| match e {
        Error::InvalidProfile { player, reason } => schema(path, slot[player] + 1, None, reason),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::generate_random;

    #[test]
    fn floats_round_trip_exactly() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn edges_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.csv");
        let net = generate_random(60, 5).unwrap();
        write_edges(&path, &net).unwrap();
        assert_eq!(read_edges(&path, 60).unwrap(), net);
    }

    #[test]
    fn bad_rows_are_located() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.csv");
        std::fs::write(&path, "src,dst\n1,2\n2,9\n").unwrap();
        match read_edges(&path, 3) {
            Err(Error::Schema { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column.as_deref(), Some("dst"));
            }
            other => panic!("unexpected {other:?}"),
        }
        std::fs::write(&path, "from,to\n1,2\n").unwrap();
        assert!(matches!(read_edges(&path, 3), Err(Error::Schema { row: 0, .. })));
    }

    #[test]
    fn missing_covariates_follow_policy() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        std::fs::write(&path, "id,age,score\n2,15,NA\n1,,3.5\n").unwrap();
        let (names, x) = read_covariates(&path, MissingPolicy::Zero).unwrap();
        assert_eq!(names, vec!["age", "score"]);
        assert_eq!(x.row(0), &[0.0, 3.5]);
        assert_eq!(x.row(1), &[15.0, 0.0]);
        match read_covariates(&path, MissingPolicy::Error) {
            Err(Error::Schema { row, column, .. }) => {
                // player 1 is read first and sits on data row 2
                assert_eq!(row, 2);
                assert_eq!(column.as_deref(), Some("age"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = read_outcomes(Path::new("/nonexistent/y.csv"), 3, 1).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn profile_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let p = ChoiceProfile::from_rows(&[vec![0.2, 0.3, 0.5], vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]]).unwrap();
        write_profile(&path, &p).unwrap();
        assert_eq!(read_profile(&path).unwrap(), p);
    }
}
