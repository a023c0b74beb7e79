//! CSV ingestion. Every file needs a header row; fields are separated by
//! ',' and use '.' as the decimal mark.
//!
//! - items: an optional leading `id` column, then one column per coordinate.
//!   Without an `id` column, items are named by their 0-based row index.
//! - pairs: `first_id,second_id,y` with `y` in {-1, 1}.
//! - triplets: `anchor_id,second_id,third_id,y` with `y` in {-1, 1}.

use std::collections::HashMap;
use std::path::Path;

use reprmetric::{Label, PairedSample, TripletSample};

use crate::error::CliError;

/// Items with their external ids, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemTable {
    pub ids: Vec<String>,
    pub vectors: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
}

impl ItemTable {
    pub fn new(ids: Vec<String>, vectors: Vec<Vec<f64>>) -> Result<Self, String> {
        if ids.len() != vectors.len() {
            return Err(format!("{} ids for {} items", ids.len(), vectors.len()));
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(format!("duplicate item id `{id}`"));
            }
        }
        Ok(ItemTable {
            ids,
            vectors,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    pub fn lookup(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }
}

pub(crate) fn reader(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>), CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::input(path, format!("cannot read: {e}")))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::input(path, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.iter().all(String::is_empty) {
        return Err(CliError::input(
            path,
            "empty file (a header row is required)",
        ));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        rows.push(record.map_err(|e| CliError::input(path, e.to_string()))?);
    }
    if rows.is_empty() {
        return Err(CliError::input(path, "no data rows"));
    }
    Ok((header, rows))
}

pub(crate) fn parse_float(path: &Path, line: usize, field: &str) -> Result<f64, CliError> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::input(
            path,
            format!("row {line}: `{field}` is not a finite number"),
        )),
    }
}

pub fn read_items(path: &Path) -> Result<ItemTable, CliError> {
    let (header, rows) = reader(path)?;
    let has_id = header[0].eq_ignore_ascii_case("id");
    let dim = header.len() - usize::from(has_id);
    if dim == 0 {
        return Err(CliError::input(
            path,
            "items need at least one coordinate column",
        ));
    }
    let mut ids = Vec::with_capacity(rows.len());
    let mut vectors = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let line = i + 2;
        let fields: Vec<&str> = row.iter().collect();
        let (id, coords) = if has_id {
            (fields[0].to_string(), &fields[1..])
        } else {
            (i.to_string(), &fields[..])
        };
        let v = coords
            .iter()
            .map(|f| parse_float(path, line, f))
            .collect::<Result<Vec<_>, _>>()?;
        ids.push(id);
        vectors.push(v);
    }
    ItemTable::new(ids, vectors).map_err(|m| CliError::input(path, m))
}

fn parse_label(path: &Path, line: usize, field: &str) -> Result<Label, CliError> {
    field
        .parse::<i64>()
        .ok()
        .and_then(|v| Label::try_from(v).ok())
        .ok_or_else(|| CliError::input(path, format!("row {line}: label `{field}` is not -1 or 1")))
}

fn resolve(items: &ItemTable, path: &Path, line: usize, id: &str) -> Result<usize, CliError> {
    items
        .lookup(id)
        .ok_or_else(|| CliError::input(path, format!("row {line}: unknown item id `{id}`")))
}

fn expect_columns(path: &Path, header: &[String], expected: &[&str]) -> Result<(), CliError> {
    if header.len() != expected.len() {
        return Err(CliError::input(
            path,
            format!(
                "expected columns {}, found {}",
                expected.join(","),
                header.join(",")
            ),
        ));
    }
    Ok(())
}

pub fn read_pairs(path: &Path, items: &ItemTable) -> Result<Vec<PairedSample>, CliError> {
    let (header, rows) = reader(path)?;
    expect_columns(path, &header, &["first_id", "second_id", "y"])?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let line = i + 2;
            let first = resolve(items, path, line, &row[0])?;
            let second = resolve(items, path, line, &row[1])?;
            let y = parse_label(path, line, &row[2])?;
            PairedSample::new(first, second, y)
                .map_err(|e| CliError::input(path, format!("row {line}: {e}")))
        })
        .collect()
}

pub fn read_triplets(path: &Path, items: &ItemTable) -> Result<Vec<TripletSample>, CliError> {
    let (header, rows) = reader(path)?;
    expect_columns(path, &header, &["anchor_id", "second_id", "third_id", "y"])?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let line = i + 2;
            let anchor = resolve(items, path, line, &row[0])?;
            let second = resolve(items, path, line, &row[1])?;
            let third = resolve(items, path, line, &row[2])?;
            let y = parse_label(path, line, &row[3])?;
            TripletSample::new(anchor, second, third, y)
                .map_err(|e| CliError::input(path, format!("row {line}: {e}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn items_with_and_without_ids() {
        let dir = tempfile::tempdir().unwrap();
        let with = file(dir.path(), "a.csv", "id,x,y\napple, 1.5,-2\npear,0,3e-1\n");
        let t = read_items(&with).unwrap();
        assert_eq!(t.ids, ["apple", "pear"]);
        assert_eq!(t.vectors, [vec![1.5, -2.0], vec![0.0, 0.3]]);
        assert_eq!(t.lookup("pear"), Some(1));

        let without = file(dir.path(), "b.csv", "x\n4\n5\n");
        let t = read_items(&without).unwrap();
        assert_eq!(t.ids, ["0", "1"]);
        assert_eq!(t.dim(), 1);
    }

    #[test]
    fn malformed_items() {
        let dir = tempfile::tempdir().unwrap();
        for (i, text) in [
            "",
            "x,y\n",
            "x,y\n1,2\n3\n",
            "x,y\n1,abc\n",
            "x\nNaN\n",
            "id,x\na,1\na,2\n",
            "id\na\n",
        ]
        .iter()
        .enumerate()
        {
            let p = file(dir.path(), &format!("{i}.csv"), text);
            assert!(read_items(&p).is_err(), "{text:?}");
        }
        assert!(read_items(&dir.path().join("missing.csv")).is_err());
    }

    #[test]
    fn comparisons() {
        let dir = tempfile::tempdir().unwrap();
        let items = ItemTable::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.0], vec![1.0], vec![2.0]],
        )
        .unwrap();
        let pairs = file(dir.path(), "p.csv", "first_id,second_id,y\na,c,-1\nb,a,1\n");
        let p = read_pairs(&pairs, &items).unwrap();
        assert_eq!(p[0], PairedSample::new(0, 2, Label::Negative).unwrap());
        assert_eq!(p[1], PairedSample::new(1, 0, Label::Positive).unwrap());

        let triplets = file(
            dir.path(),
            "t.csv",
            "anchor_id,second_id,third_id,y\na,b,c,1\n",
        );
        let t = read_triplets(&triplets, &items).unwrap();
        assert_eq!(t[0], TripletSample::new(0, 1, 2, Label::Positive).unwrap());

        for text in [
            "first_id,second_id,y\na,z,1\n",
            "first_id,second_id,y\na,b,0\n",
            "first_id,second_id,y\na,a,1\n",
            "first_id,second_id\na,b\n",
            "first_id,second_id,y\n",
        ] {
            let p = file(dir.path(), "bad.csv", text);
            assert!(read_pairs(&p, &items).is_err(), "{text:?}");
        }
    }
}
