//! Typed tabular data read from delimited text.

use std::io::{Read, Write};
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cell spellings treated as missing.
const MISSING_TOKENS: [&str; 7] = ["", "NA", "N/A", "NaN", "nan", "null", "NULL"];

fn is_missing_token(s: &str) -> bool {
    MISSING_TOKENS.contains(&s.trim())
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Text(Vec<String>),
}

/// One column plus its missing-value mask. Missing numeric cells hold NaN,
/// missing text cells hold the empty string.
#[derive(Debug, Clone)]
pub struct Column {
    data: ColumnData,
    missing: Vec<bool>,
}

impl Column {
    pub fn numeric(values: Vec<f64>) -> Self {
        let missing = values.iter().map(|v| !v.is_finite()).collect();
        let values = values
            .into_iter()
            .map(|v| if v.is_finite() { v } else { f64::NAN })
            .collect();
        Column {
            data: ColumnData::Numeric(values),
            missing,
        }
    }

    pub fn text<S: Into<String>>(values: impl IntoIterator<Item = S>) -> Self {
        let values: Vec<String> = values.into_iter().map(Into::into).collect();
        Column {
            missing: vec![false; values.len()],
            data: ColumnData::Text(values),
        }
    }

    /// Text column where `None` marks a missing cell.
    pub fn text_with_missing(values: Vec<Option<String>>) -> Self {
        let missing = values.iter().map(Option::is_none).collect();
        Column {
            data: ColumnData::Text(values.into_iter().map(Option::unwrap_or_default).collect()),
            missing,
        }
    }

    pub fn len(&self) -> usize {
        self.missing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn data(&self) -> &ColumnData {
        &self.data
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.data, ColumnData::Numeric(_))
    }

    pub fn as_numeric(&self) -> Option<&[f64]> {
        match &self.data {
            ColumnData::Numeric(v) => Some(v),
            ColumnData::Text(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<&[String]> {
        match &self.data {
            ColumnData::Text(v) => Some(v),
            ColumnData::Numeric(_) => None,
        }
    }

    pub fn is_missing(&self, row: usize) -> bool {
        self.missing[row]
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    pub fn kind_name(&self) -> &'static str {
        if self.is_numeric() {
            "numeric"
        } else {
            "text"
        }
    }

    /// Cell rendered as text; missing cells render empty.
    pub fn cell(&self, row: usize) -> String {
        if self.missing[row] {
            return String::new();
        }
        match &self.data {
            ColumnData::Numeric(v) => v[row].to_string(),
            ColumnData::Text(v) => v[row].clone(),
        }
    }

    fn take(&self, rows: &[usize]) -> Column {
        let data = match &self.data {
            ColumnData::Numeric(v) => ColumnData::Numeric(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Text(v) => ColumnData::Text(rows.iter().map(|&r| v[r].clone()).collect()),
        };
        Column {
            data,
            missing: rows.iter().map(|&r| self.missing[r]).collect(),
        }
    }

    /// Numeric iff every non-missing cell parses as a finite number.
    fn infer(cells: Vec<String>) -> Column {
        let missing: Vec<bool> = cells.iter().map(|c| is_missing_token(c)).collect();
        let parsed: Option<Vec<f64>> = cells
            .iter()
            .zip(&missing)
            .map(|(c, &m)| {
                if m {
                    Some(f64::NAN)
                } else {
                    c.trim().parse::<f64>().ok().filter(|v| v.is_finite())
                }
            })
            .collect();
        let data = match parsed {
            Some(values) => ColumnData::Numeric(values),
            None => ColumnData::Text(
                cells
                    .into_iter()
                    .zip(&missing)
                    .map(|(c, &m)| if m { String::new() } else { c })
                    .collect(),
            ),
        };
        Column { data, missing }
    }
}

impl PartialEq for Column {
    /// Cell-wise equality; missing cells compare equal to each other.
    fn eq(&self, other: &Self) -> bool {
        if self.missing != other.missing {
            return false;
        }
        match (&self.data, &other.data) {
            (ColumnData::Numeric(a), ColumnData::Numeric(b)) => a
                .iter()
                .zip(b)
                .zip(&self.missing)
                .all(|((x, y), &m)| m || x == y),
            (ColumnData::Text(a), ColumnData::Text(b)) => a == b,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ReadOptions {
    pub delimiter: u8,
}

impl Default for ReadOptions {
    fn default() -> Self {
        ReadOptions { delimiter: b',' }
    }
}

/// Named columns of equal length, in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DataTable {
    columns: IndexMap<String, Column>,
    nrows: usize,
}

impl DataTable {
    pub fn from_columns<S: Into<String>>(columns: impl IntoIterator<Item = (S, Column)>) -> Result<Self> {
        let mut map = IndexMap::new();
        let mut nrows = None;
        for (name, col) in columns {
            let name = name.into();
            match nrows {
                None => nrows = Some(col.len()),
                Some(n) if n != col.len() => {
                    return Err(Error::DimensionMismatch(format!(
                        "column `{name}` has {} rows, expected {n}",
                        col.len()
                    )))
                }
                _ => {}
            }
            if map.contains_key(&name) {
                return Err(Error::DuplicateColumn(name));
            }
            map.insert(name, col);
        }
        Ok(DataTable {
            columns: map,
            nrows: nrows.unwrap_or(0),
        })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.keys().map(String::as_str)
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &Column)> {
        self.columns.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .get(name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.contains_key(name)
    }

    /// Column subset in the requested order. Lookup is case-sensitive.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<DataTable> {
        let mut columns = IndexMap::new();
        for name in names {
            let name = name.as_ref();
            columns.insert(name.to_string(), self.column(name)?.clone());
        }
        Ok(DataTable {
            columns,
            nrows: self.nrows,
        })
    }

    /// Row subset, in the given order.
    pub fn take_rows(&self, rows: &[usize]) -> DataTable {
        DataTable {
            columns: self
                .columns
                .iter()
                .map(|(k, c)| (k.clone(), c.take(rows)))
                .collect(),
            nrows: rows.len(),
        }
    }

    /// Indices of rows with no missing cell among `names`.
    pub fn complete_rows<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        let cols = names
            .iter()
            .map(|n| self.column(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..self.nrows)
            .filter(|&r| cols.iter().all(|c| !c.is_missing(r)))
            .collect())
    }

    pub fn read_delimited(path: impl AsRef<Path>, options: ReadOptions) -> Result<DataTable> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_reader(file, options)
    }

    pub fn from_reader<R: Read>(reader: R, options: ReadOptions) -> Result<DataTable> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(options.delimiter)
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Delimited(e.to_string()))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
            return Err(Error::EmptyInput("no header row".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for h in &headers {
            if !seen.insert(h) {
                return Err(Error::DuplicateColumn(h.clone()));
            }
        }
        let mut cells: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
        for (i, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Delimited(e.to_string()))?;
            if record.len() != headers.len() {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    expected: headers.len(),
                    found: record.len(),
                });
            }
            for (j, field) in record.iter().enumerate() {
                cells[j].push(field.to_string());
            }
        }
        let columns = headers.into_iter().zip(cells).map(|(h, c)| (h, Column::infer(c)));
        DataTable::from_columns(columns)
    }

    pub fn write_delimited<W: Write>(&self, writer: W, delimiter: u8) -> Result<()> {
        let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(writer);
        w.write_record(self.columns.keys())
            .map_err(|e| Error::Delimited(e.to_string()))?;
        for r in 0..self.nrows {
            w.write_record(self.columns.values().map(|c| c.cell(r)))
                .map_err(|e| Error::Delimited(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Serialized as a list of columns; missing cells become `null`.
#[derive(Serialize, Deserialize)]
struct ColumnRecord {
    name: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    numeric: Option<Vec<Option<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    text: Option<Vec<Option<String>>>,
}

impl Serialize for DataTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let records: Vec<ColumnRecord> = self
            .columns
            .iter()
            .map(|(name, col)| {
                let mut rec = ColumnRecord {
                    name: name.clone(),
                    numeric: None,
                    text: None,
                };
                match &col.data {
                    ColumnData::Numeric(v) => {
                        rec.numeric = Some(
                            v.iter()
                                .zip(&col.missing)
                                .map(|(&x, &m)| (!m).then_some(x))
                                .collect(),
                        )
                    }
                    ColumnData::Text(v) => {
                        rec.text = Some(
                            v.iter()
                                .zip(&col.missing)
                                .map(|(x, &m)| (!m).then(|| x.clone()))
                                .collect(),
                        )
                    }
                }
                rec
            })
            .collect();
        records.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DataTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let records = Vec::<ColumnRecord>::deserialize(d)?;
        let columns = records
            .into_iter()
            .map(|rec| {
                let col = match (rec.numeric, rec.text) {
                    (Some(v), None) => Column::numeric(v.into_iter().map(|x| x.unwrap_or(f64::NAN)).collect()),
                    (None, Some(v)) => Column::text_with_missing(v),
                    _ => return Err(D::Error::custom(format!("column `{}` needs exactly one of numeric/text", rec.name))),
                };
                Ok((rec.name, col))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        DataTable::from_columns(columns).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const AMES_HEAD: &str = "SalePrice,Style,SqFt,Fire
162000,2 Story,1400,No
195000,2 Story,1660,No
164000,Other,1646,Yes
417500,1 Story,2464,Yes
186800,1 Story,1400,No
";

    fn ames() -> DataTable {
        DataTable::from_reader(AMES_HEAD.as_bytes(), ReadOptions::default()).unwrap()
    }

    #[test]
    fn infers_column_types() {
        let t = ames();
        assert_eq!(t.nrows(), 5);
        let kinds: Vec<_> = t.columns().map(|(n, c)| (n, c.kind_name())).collect();
        assert_eq!(
            kinds,
            vec![
                ("SalePrice", "numeric"),
                ("Style", "text"),
                ("SqFt", "numeric"),
                ("Fire", "text")
            ]
        );
        assert_eq!(t.column("SqFt").unwrap().as_numeric().unwrap()[3], 2464.0);
    }

    #[test]
    fn mixed_column_falls_back_to_text() {
        let t = DataTable::from_reader("a\n1\n2\nx\n".as_bytes(), ReadOptions::default()).unwrap();
        assert!(!t.column("a").unwrap().is_numeric());
    }

    #[test]
    fn scientific_notation_is_numeric() {
        let t = DataTable::from_reader("a\n1e3\n-2.5E-2\n.5\n".as_bytes(), ReadOptions::default()).unwrap();
        assert_eq!(t.column("a").unwrap().as_numeric().unwrap(), &[1000.0, -0.025, 0.5]);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(DataTable::from_reader("".as_bytes(), ReadOptions::default()).is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = DataTable::from_reader("a,b\n1,2\n3\n".as_bytes(), ReadOptions::default()).unwrap_err();
        assert_eq!(
            err,
            Error::RaggedRow {
                row: 2,
                expected: 2,
                found: 1
            }
        );
    }

    #[test]
    fn duplicate_headers_rejected() {
        let err = DataTable::from_reader("a,a\n1,2\n".as_bytes(), ReadOptions::default()).unwrap_err();
        assert_eq!(err, Error::DuplicateColumn("a".into()));
    }

    #[test]
    fn missing_cells_are_masked() {
        let t = DataTable::from_reader("a,b\n1,x\nNA,\n3,z\n".as_bytes(), ReadOptions::default()).unwrap();
        let a = t.column("a").unwrap();
        assert!(a.is_numeric());
        assert!(a.is_missing(1));
        assert!(t.column("b").unwrap().is_missing(1));
        assert_eq!(t.complete_rows(&["a", "b"]).unwrap(), vec![0, 2]);
    }

    #[test]
    fn select_behaviour() {
        let t = ames();
        let s = t.select(&["SqFt"]).unwrap();
        assert_eq!((s.ncols(), s.nrows()), (1, 5));
        assert_eq!(t.select(&["Sqft"]).unwrap_err(), Error::UnknownColumn("Sqft".into()));
        let names: Vec<String> = t.names().map(String::from).collect();
        assert_eq!(t.select(&names).unwrap(), t);
    }

    #[test]
    fn custom_delimiter() {
        let t = DataTable::from_reader("a;b\n1;2\n".as_bytes(), ReadOptions { delimiter: b';' }).unwrap();
        assert_eq!(t.ncols(), 2);
    }

    #[test]
    fn write_then_read_round_trips() {
        let t = DataTable::from_reader("a,b,c\n1.25,x y,\n-3e-7,\"q,r\",4\n".as_bytes(), ReadOptions::default())
            .unwrap();
        let mut buf = Vec::new();
        t.write_delimited(&mut buf, b',').unwrap();
        let back = DataTable::from_reader(buf.as_slice(), ReadOptions::default()).unwrap();
        assert_eq!(back, t);
    }
}
