use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ecdf::EcdfTransform;
use crate::error::{Error, Result};
use crate::likelihood::Dataset;
use crate::simgen::{truth_probs, TruthOracle};

/// How monotone covariates are mapped into `[0,1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    /// Empirical distribution function of the column.
    #[default]
    Ecdf,
    /// Values are used as they are and must already lie in `[0,1]`.
    Identity,
}

/// Column roles in a CSV file.
///
/// Empty `monotone` / `linear` lists are filled from the header: columns named
/// `x...` are monotone and `z...` linear. [`Schema::resolve`] returns the
/// explicit form that is stored in run manifests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Schema {
    pub response: String,
    /// Number of categories; the largest observed response when absent.
    pub levels: Option<usize>,
    pub monotone: Vec<String>,
    /// Monotone covariates entered as `1 - u` after the transform.
    pub inverted: Vec<String>,
    /// Monotone covariates with ordered categorical codes.
    pub ordinal: Vec<String>,
    pub linear: Vec<String>,
    pub cluster: Option<String>,
    pub transform: Transform,
}

impl Default for Schema {
    fn default() -> Self {
        Self {
            response: "y".into(),
            levels: None,
            monotone: Vec::new(),
            inverted: Vec::new(),
            ordinal: Vec::new(),
            linear: Vec::new(),
            cluster: None,
            transform: Transform::Ecdf,
        }
    }
}

fn is_prefixed(name: &str, prefix: char) -> bool {
    let mut chars = name.chars();
    chars.next() == Some(prefix) && chars.as_str().chars().all(|c| c.is_ascii_digit()) && name.len() > 1
}

impl Schema {
    /// Fills automatic column lists and checks every named column exists.
    pub fn resolve(&self, headers: &[String]) -> Result<Schema> {
        let mut out = self.clone();
        if out.monotone.is_empty() {
            out.monotone = headers.iter().filter(|h| is_prefixed(h, 'x')).cloned().collect();
        }
        if out.linear.is_empty() {
            out.linear = headers.iter().filter(|h| is_prefixed(h, 'z')).cloned().collect();
        }
        if out.monotone.is_empty() {
            return Err(Error::Data("no monotone covariate columns".into()));
        }
        let named = std::iter::once(&out.response)
            .chain(&out.monotone)
            .chain(&out.inverted)
            .chain(&out.ordinal)
            .chain(&out.linear)
            .chain(out.cluster.iter());
        for name in named {
            if !headers.iter().any(|h| h == name) {
                return Err(Error::Data(format!("missing column '{name}'")));
            }
        }
        for name in out.inverted.iter().chain(&out.ordinal) {
            if !out.monotone.contains(name) {
                return Err(Error::Data(format!("column '{name}' is not a monotone covariate")));
            }
        }
        Ok(out)
    }
}

/// A dataset together with what is needed to map new rows the same way.
#[derive(Clone, Debug)]
pub struct LoadedData {
    pub dataset: Dataset,
    pub schema: Schema,
    /// One transform per monotone covariate (`None` for the identity).
    pub transforms: Vec<Option<EcdfTransform>>,
    /// Original cluster labels; cluster `c` (1-based) is `cluster_labels[c - 1]`.
    pub cluster_labels: Vec<String>,
    /// Monotone covariates whose transformed values are all equal.
    pub degenerate: Vec<String>,
}

fn read_table(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        rows.push(rec.map_err(|e| Error::Row { row: i + 1, message: e.to_string() })?);
    }
    Ok((headers, rows))
}

fn cell<'a>(row: &'a csv::StringRecord, idx: usize, name: &str, n: usize) -> Result<&'a str> {
    match row.get(idx) {
        Some(v) if !v.is_empty() && !v.eq_ignore_ascii_case("na") => Ok(v),
        _ => Err(Error::Row { row: n + 1, message: format!("missing value in column '{name}'") }),
    }
}

fn number(row: &csv::StringRecord, idx: usize, name: &str, n: usize) -> Result<f64> {
    let raw = cell(row, idx, name, n)?;
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Row { row: n + 1, message: format!("non-numeric value '{raw}' in column '{name}'") }),
    }
}

/// Reads a CSV file with a header row according to `schema`.
pub fn load_dataset(path: &Path, schema: &Schema) -> Result<LoadedData> {
    let (headers, rows) = read_table(path)?;
    let schema = schema.resolve(&headers)?;
    if rows.is_empty() {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }
    let index = |name: &str| headers.iter().position(|h| h == name).expect("resolved column");
    let yi = index(&schema.response);
    let mut y = Vec::with_capacity(rows.len());
    for (n, row) in rows.iter().enumerate() {
        let raw = cell(row, yi, &schema.response, n)?;
        let label: usize = raw.parse().map_err(|_| Error::Row {
            row: n + 1,
            message: format!("response '{raw}' is not a category in 1..=K"),
        })?;
        y.push(label);
    }
    let levels = match schema.levels {
        Some(k) => k,
        None => y.iter().copied().max().unwrap_or(0).max(2),
    };
    for (n, &label) in y.iter().enumerate() {
        if label == 0 || label > levels {
            return Err(Error::Row { row: n + 1, message: format!("response {label} outside 1..={levels}") });
        }
    }

    let p = schema.monotone.len();
    let mut columns = vec![Vec::with_capacity(rows.len()); p];
    for (j, name) in schema.monotone.iter().enumerate() {
        let idx = index(name);
        for (n, row) in rows.iter().enumerate() {
            columns[j].push(number(row, idx, name, n)?);
        }
    }
    let mut transforms = Vec::with_capacity(p);
    let mut degenerate = Vec::new();
    for (j, name) in schema.monotone.iter().enumerate() {
        let invert = schema.inverted.contains(name);
        let t = match schema.transform {
            Transform::Ecdf => {
                let t = EcdfTransform::fit(&columns[j])?;
                columns[j] = t.apply_all(&columns[j]);
                Some(t)
            }
            Transform::Identity => {
                if let Some(n) = columns[j].iter().position(|v| !(0.0..=1.0).contains(v)) {
                    return Err(Error::Row {
                        row: n + 1,
                        message: format!("column '{name}' value {} outside [0,1] without a transform", columns[j][n]),
                    });
                }
                None
            }
        };
        if invert {
            for v in &mut columns[j] {
                *v = 1.0 - *v;
            }
        }
        if columns[j].windows(2).all(|w| w[0] == w[1]) {
            degenerate.push(name.clone());
        }
        transforms.push(t);
    }
    let x: Vec<Vec<f64>> = (0..rows.len()).map(|n| columns.iter().map(|c| c[n]).collect()).collect();
    let mut dataset = Dataset::new(levels, x, y)?;

    if !schema.linear.is_empty() {
        let idx: Vec<usize> = schema.linear.iter().map(|n| index(n)).collect();
        let mut z = Vec::with_capacity(rows.len());
        for (n, row) in rows.iter().enumerate() {
            let mut r = Vec::with_capacity(idx.len());
            for (&i, name) in idx.iter().zip(&schema.linear) {
                r.push(number(row, i, name, n)?);
            }
            z.push(r);
        }
        dataset = dataset.with_linear(z)?;
    }

    let mut cluster_labels = Vec::new();
    if let Some(name) = &schema.cluster {
        let idx = index(name);
        let mut raw = Vec::with_capacity(rows.len());
        for (n, row) in rows.iter().enumerate() {
            raw.push(cell(row, idx, name, n)?.to_owned());
        }
        let mut ids: BTreeMap<&str, usize> = raw.iter().map(|s| (s.as_str(), 0)).collect();
        for (i, v) in ids.values_mut().enumerate() {
            *v = i + 1;
        }
        cluster_labels = ids.keys().map(|s| s.to_string()).collect();
        let assigned = raw.iter().map(|s| ids[s.as_str()]).collect();
        dataset = dataset.with_clusters(assigned)?;
    }

    Ok(LoadedData { dataset, schema, transforms, cluster_labels, degenerate })
}

/// Covariates of new rows mapped with the transforms of a training set.
#[derive(Clone, Debug, PartialEq)]
pub struct CovariateRows {
    pub x: Vec<Vec<f64>>,
    pub z: Vec<Vec<f64>>,
    /// 0-based cluster index, `None` for labels absent from the training data.
    pub cluster: Vec<Option<usize>>,
}

impl CovariateRows {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

impl LoadedData {
    /// Reads covariate columns of another file; the response column is not needed.
    pub fn covariates_from(&self, path: &Path) -> Result<CovariateRows> {
        let (headers, rows) = read_table(path)?;
        let schema = &self.schema;
        let index = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Data(format!("{}: missing column '{name}'", path.display())))
        };
        let mono: Vec<usize> = schema.monotone.iter().map(|n| index(n)).collect::<Result<_>>()?;
        let lin: Vec<usize> = schema.linear.iter().map(|n| index(n)).collect::<Result<_>>()?;
        let clu = schema.cluster.as_deref().map(index).transpose()?;
        let mut out = CovariateRows { x: Vec::new(), z: Vec::new(), cluster: Vec::new() };
        for (n, row) in rows.iter().enumerate() {
            let mut x = Vec::with_capacity(mono.len());
            for (j, (&i, name)) in mono.iter().zip(&schema.monotone).enumerate() {
                let raw = number(row, i, name, n)?;
                let mut u = match &self.transforms[j] {
                    Some(t) => t.apply(raw),
                    None if (0.0..=1.0).contains(&raw) => raw,
                    None => {
                        return Err(Error::Row {
                            row: n + 1,
                            message: format!("column '{name}' value {raw} outside [0,1] without a transform"),
                        })
                    }
                };
                if schema.inverted.contains(name) {
                    u = 1.0 - u;
                }
                x.push(u);
            }
            let mut z = Vec::with_capacity(lin.len());
            for (&i, name) in lin.iter().zip(&schema.linear) {
                z.push(number(row, i, name, n)?);
            }
            let cluster = match (clu, &schema.cluster) {
                (Some(i), Some(name)) => {
                    let label = cell(row, i, name, n)?;
                    self.cluster_labels.iter().position(|l| l == label)
                }
                _ => None,
            };
            out.x.push(x);
            out.z.push(z);
            out.cluster.push(cluster);
        }
        Ok(out)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

/// Writes rows of already formatted cells.
pub fn write_csv<I, R>(path: &Path, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let io = |e: std::io::Error| Error::io(path, e);
    let mut w = csv::Writer::from_writer(create(path)?);
    let csv_err = |e: csv::Error| Error::Format(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>()).map_err(csv_err)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

/// Reads a numeric CSV with a header row.
pub fn read_numeric_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let (headers, rows) = read_table(path)?;
    let mut out = Vec::with_capacity(rows.len());
    for (n, row) in rows.iter().enumerate() {
        let mut r = Vec::with_capacity(headers.len());
        for (i, name) in headers.iter().enumerate() {
            r.push(number(row, i, name, n)?);
        }
        out.push(r);
    }
    Ok((headers, out))
}

fn numbered(prefix: &str, count: usize) -> impl Iterator<Item = String> + '_ {
    (1..=count).map(move |i| format!("{prefix}{i}"))
}

/// Writes `y, x1.., z1.., [cluster]` with values in shortest round-trip form.
pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let mut header = vec!["y".to_string()];
    header.extend(numbered("x", data.covariates()));
    header.extend(numbered("z", data.linear_covariates()));
    let clustered = data.cluster_count() > 0;
    if clustered {
        header.push("cluster".into());
    }
    let rows = (0..data.len()).map(|n| {
        let mut r = vec![data.y(n).to_string()];
        r.extend(data.x(n).iter().map(f64::to_string));
        r.extend(data.z(n).iter().map(f64::to_string));
        if let Some(c) = data.cluster(n) {
            r.push((c + 1).to_string());
        }
        r
    });
    write_csv(path, &header, rows)
}

/// Exact category probabilities of every observation: `row, p1..pK`.
pub fn write_truth(path: &Path, data: &Dataset, oracle: &TruthOracle) -> Result<()> {
    let mut header = vec!["row".to_string()];
    header.extend(numbered("p", oracle.levels()));
    let table = oracle.table(data);
    let rows = table.iter().enumerate().map(|(n, p)| {
        std::iter::once((n + 1).to_string()).chain(p.iter().map(f64::to_string)).collect::<Vec<_>>()
    });
    write_csv(path, &header, rows)
}

/// Reads a table written by [`write_truth`].
pub fn read_truth(path: &Path) -> Result<Vec<Vec<f64>>> {
    let (headers, rows) = read_numeric_csv(path)?;
    if headers.first().map(String::as_str) != Some("row") || headers.len() < 3 {
        return Err(Error::Format(format!("{}: expected columns row, p1..pK", path.display())));
    }
    Ok(rows.into_iter().map(|r| r[1..].to_vec()).collect())
}

/// Truth on a regular `resolution x resolution` grid over the first two
/// covariates (other covariates and `z` at zero): `x1, x2, S2..SK, p1..pK`.
pub fn write_truth_grid(path: &Path, oracle: &TruthOracle, resolution: usize) -> Result<()> {
    if resolution < 2 {
        return Err(Error::invalid("grid resolution must be at least 2"));
    }
    let k = oracle.levels();
    let mut header = vec!["x1".to_string(), "x2".to_string()];
    header.extend(numbered("S", k).skip(1));
    header.extend(numbered("p", k));
    let z = vec![0.0; oracle.beta.len()];
    let step = 1.0 / (resolution - 1) as f64;
    let rows = (0..resolution).flat_map(|i| (0..resolution).map(move |j| (i, j))).map(|(i, j)| {
        let x = [i as f64 * step, j as f64 * step];
        let s = oracle.survival(&x, &z);
        let p = truth_probs(oracle, &x, &z);
        let mut r = vec![x[0].to_string(), x[1].to_string()];
        r.extend(s[1..].iter().map(f64::to_string));
        r.extend(p.iter().map(f64::to_string));
        r
    });
    write_csv(path, &header, rows)
}

/// Writes any serializable value as pretty JSON.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn create_file(path: &Path) -> Result<BufWriter<File>> {
    create(path)
}
