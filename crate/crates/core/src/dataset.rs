//! Multi-view data model, CSV loading, normalisation and feature
//! concatenation.
//!
//! On disk every view is a headerless numeric CSV with one sample per row.
//! In memory views are stored transposed, features × samples.

use std::collections::HashMap;
use std::fs::File;
use std::ops::Range;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, ensure_nonempty, DenseMatrix};

mod synthetic;

pub use synthetic::{generate_synthetic, SyntheticSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct MultiViewDataset {
    views: Vec<DenseMatrix>,
    labels: Option<Vec<usize>>,
    names: Option<Vec<String>>,
}

impl MultiViewDataset {
    /// Builds a dataset from `d_i × n` views, validating the shared sample
    /// count and, when present, that labels cover `0..m` without gaps.
    pub fn new(views: Vec<DenseMatrix>, labels: Option<Vec<usize>>) -> Result<Self> {
        let first = views
            .first()
            .ok_or_else(|| Error::InvalidInput("a dataset needs at least one view".into()))?;
        let n = first.ncols();
        for (i, view) in views.iter().enumerate() {
            ensure_nonempty(view, &format!("view {i}"))?;
            ensure_finite(view, &format!("view {i}"))?;
            if view.ncols() != n {
                return Err(Error::Shape(format!(
                    "view {i} has {} samples, view 0 has {n}",
                    view.ncols()
                )));
            }
        }
        if let Some(labels) = &labels {
            validate_labels(labels, n)?;
        }
        Ok(Self {
            views,
            labels,
            names: None,
        })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.views.len() {
            return Err(Error::Shape(format!(
                "{} view names for {} views",
                names.len(),
                self.views.len()
            )));
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn views(&self) -> &[DenseMatrix] {
        &self.views
    }

    pub fn view(&self, i: usize) -> &DenseMatrix {
        &self.views[i]
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    pub fn n_samples(&self) -> usize {
        self.views[0].ncols()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.views.iter().map(|v| v.nrows()).collect()
    }

    /// Number of ground-truth clusters, if labels are attached.
    pub fn n_clusters(&self) -> Option<usize> {
        self.labels
            .as_ref()
            .map(|l| l.iter().copied().max().map_or(0, |m| m + 1))
    }
}

fn validate_labels(labels: &[usize], n: usize) -> Result<()> {
    if labels.len() != n {
        return Err(Error::Shape(format!(
            "{} labels for {n} samples",
            labels.len()
        )));
    }
    let mut distinct: Vec<usize> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let m = distinct.len();
    if let Some(&bad) = labels.iter().find(|&&l| l >= m) {
        return Err(Error::LabelRange {
            label: bad,
            clusters: m,
        });
    }
    Ok(())
}

/// Concatenated `d × n` data matrix with the row range of each view.
#[derive(Debug, Clone, PartialEq)]
pub struct JointRepresentation {
    pub x: DenseMatrix,
    pub view_offsets: Vec<Range<usize>>,
}

impl JointRepresentation {
    pub fn n_samples(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_features(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_views(&self) -> usize {
        self.view_offsets.len()
    }

    /// Row block of view `i`.
    pub fn view(&self, i: usize) -> DenseMatrix {
        let r = &self.view_offsets[i];
        self.x.rows(r.start, r.len()).into_owned()
    }

    /// Splits back into the per-view blocks.
    pub fn split(&self) -> Vec<DenseMatrix> {
        (0..self.n_views()).map(|i| self.view(i)).collect()
    }
}

/// Per-feature min-max scaling to `[0, 1]`; constant features map to 0.
pub fn normalize_view(view: &DenseMatrix) -> Result<DenseMatrix> {
    ensure_nonempty(view, "view")?;
    ensure_finite(view, "view")?;
    let mut out = view.clone();
    for mut row in out.row_iter_mut() {
        let lo = row.min();
        let hi = row.max();
        let range = hi - lo;
        if range > 0.0 {
            row.apply(|x| *x = (*x - lo) / range);
        } else {
            row.fill(0.0);
        }
    }
    Ok(out)
}

/// Stacks the views (normalised first when `normalize` is set) into the joint
/// representation; column `j` is `[x_j^(1); ...; x_j^(v)]`.
pub fn concatenate(dataset: &MultiViewDataset, normalize: bool) -> Result<JointRepresentation> {
    let n = dataset.n_samples();
    let d: usize = dataset.dims().iter().sum();
    let mut x = DenseMatrix::zeros(d, n);
    let mut view_offsets = Vec::with_capacity(dataset.n_views());
    let mut offset = 0;
    for (i, view) in dataset.views().iter().enumerate() {
        if view.ncols() != n {
            return Err(Error::Shape(format!(
                "view {i} has {} samples, expected {n}",
                view.ncols()
            )));
        }
        let block = if normalize {
            normalize_view(view)?
        } else {
            view.clone()
        };
        x.rows_mut(offset, block.nrows()).copy_from(&block);
        view_offsets.push(offset..offset + block.nrows());
        offset += block.nrows();
    }
    Ok(JointRepresentation { x, view_offsets })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    /// Skip the first line of every file.
    pub header: bool,
}

/// Reads a samples × features CSV and returns it transposed (features ×
/// samples).
pub fn read_matrix_csv(path: &Path, options: CsvOptions) -> Result<DenseMatrix> {
    let rows = read_rows(path, options)?;
    if rows.is_empty() {
        return Err(Error::InvalidInput(format!("{} is empty", path.display())));
    }
    let width = rows[0].len();
    let mut m = DenseMatrix::zeros(width, rows.len());
    for (r, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::Parse {
                path: path.to_owned(),
                row: r + 1,
                col: row.len().min(width) + 1,
                msg: format!("expected {width} columns, found {}", row.len()),
            });
        }
        for (c, &v) in row.iter().enumerate() {
            m[(c, r)] = v;
        }
    }
    Ok(m)
}

fn read_rows(path: &Path, options: CsvOptions) -> Result<Vec<Vec<f64>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(options.header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let line_offset = usize::from(options.header);
    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let row = r + 1 + line_offset;
        let record = record.map_err(|e| Error::Parse {
            path: path.to_owned(),
            row,
            col: 0,
            msg: e.to_string(),
        })?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let values = record
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    path: path.to_owned(),
                    row,
                    col: c + 1,
                    msg: format!("not a number: {cell:?}"),
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Parse {
                        path: path.to_owned(),
                        row,
                        col: c + 1,
                        msg: format!("non-finite value {cell:?}"),
                    })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(values);
    }
    Ok(rows)
}

/// Reads a single-column label file and relabels ids to `0..m` in order of
/// first appearance.
pub fn read_labels_csv(path: &Path, options: CsvOptions) -> Result<Vec<usize>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(options.header)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut raw = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let row = r + 1 + usize::from(options.header);
        let record = record.map_err(|e| Error::Parse {
            path: path.to_owned(),
            row,
            col: 0,
            msg: e.to_string(),
        })?;
        let cell = record.get(0).unwrap_or("");
        if cell.is_empty() && record.len() == 1 {
            continue;
        }
        let id: i64 = cell.parse().map_err(|_| Error::Parse {
            path: path.to_owned(),
            row,
            col: 1,
            msg: format!("not an integer label: {cell:?}"),
        })?;
        raw.push(id);
    }
    if raw.is_empty() {
        return Err(Error::InvalidInput(format!("{} is empty", path.display())));
    }
    Ok(relabel_first_appearance(&raw))
}

pub fn relabel_first_appearance<T: std::hash::Hash + Eq + Copy>(raw: &[T]) -> Vec<usize> {
    let mut ids = HashMap::new();
    raw.iter()
        .map(|id| {
            let next = ids.len();
            *ids.entry(*id).or_insert(next)
        })
        .collect()
}

/// Loads one CSV per view plus an optional label file.
pub fn load_views<P: AsRef<Path>>(
    paths: &[P],
    label_path: Option<&Path>,
    options: CsvOptions,
) -> Result<MultiViewDataset> {
    if paths.is_empty() {
        return Err(Error::InvalidInput("no view files given".into()));
    }
    let mut views = Vec::with_capacity(paths.len());
    let mut first: Option<(PathBuf, usize)> = None;
    for path in paths {
        let path = path.as_ref();
        let view = read_matrix_csv(path, options)?;
        match &first {
            None => first = Some((path.to_owned(), view.ncols())),
            Some((p0, n0)) if *n0 != view.ncols() => {
                return Err(Error::Shape(format!(
                    "{} has {n0} samples but {} has {}",
                    p0.display(),
                    path.display(),
                    view.ncols()
                )));
            }
            Some(_) => {}
        }
        views.push(view);
    }
    let labels = label_path
        .map(|p| read_labels_csv(p, options))
        .transpose()?;
    let names = paths
        .iter()
        .map(|p| {
            p.as_ref()
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        })
        .collect();
    MultiViewDataset::new(views, labels)?.with_names(names)
}

/// Writes a features × samples matrix as a samples × features CSV with 17
/// significant digits, the inverse of [`read_matrix_csv`].
pub fn write_matrix_csv(path: &Path, m: &DenseMatrix) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    let mut record = Vec::with_capacity(m.nrows());
    for col in m.column_iter() {
        record.clear();
        record.extend(col.iter().map(|v| format!("{v:.16e}")));
        writer
            .write_record(&record)
            .map_err(|e| Error::io(path, e.into()))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

pub fn write_labels_csv(path: &Path, labels: &[usize]) -> Result<()> {
    let body: String = labels.iter().map(|l| format!("{l}\n")).collect();
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;
    use std::io::Write;

    fn write_csv(dir: &Path, name: &str, rows: usize, cols: usize) -> PathBuf {
        let path = dir.join(name);
        let mut f = File::create(&path).unwrap();
        for r in 0..rows {
            let line: Vec<String> = (0..cols).map(|c| format!("{}", r * cols + c)).collect();
            writeln!(f, "{}", line.join(",")).unwrap();
        }
        path
    }

    #[test]
    fn load_two_views() {
        let dir = tempfile::tempdir().unwrap();
        let a = write_csv(dir.path(), "a.csv", 10, 4);
        let b = write_csv(dir.path(), "b.csv", 10, 6);
        let ds = load_views(&[a, b], None, CsvOptions::default()).unwrap();
        assert_eq!(ds.n_views(), 2);
        assert_eq!(ds.n_samples(), 10);
        assert_eq!(ds.dims(), vec![4, 6]);
        // row 2 of the file is sample 2: values 8..12
        assert_eq!(ds.view(0)[(1, 2)], 9.0);
    }

    #[test]
    fn load_mismatched_sample_counts() {
        let dir = tempfile::tempdir().unwrap();
        let a = write_csv(dir.path(), "a.csv", 10, 4);
        let b = write_csv(dir.path(), "b.csv", 9, 6);
        let err = load_views(&[a, b], None, CsvOptions::default()).unwrap_err();
        match err {
            Error::Shape(msg) => assert!(msg.contains("a.csv") && msg.contains("b.csv")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn load_reports_bad_cell_location() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "1,2,3\n4,x,6\n").unwrap();
        match read_matrix_csv(&path, CsvOptions::default()) {
            Err(Error::Parse { row, col, .. }) => assert_eq!((row, col), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn load_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, "").unwrap();
        assert!(matches!(
            read_matrix_csv(&path, CsvOptions::default()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn header_is_skipped_on_request() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        std::fs::write(&path, "f1,f2\n1,2\n3,4\n").unwrap();
        let m = read_matrix_csv(&path, CsvOptions { header: true }).unwrap();
        assert_eq!(m, dmatrix![1.0, 3.0; 2.0, 4.0]);
    }

    #[test]
    fn labels_relabel_in_first_appearance_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.csv");
        std::fs::write(&path, "7\n7\n-2\n40\n-2\n").unwrap();
        let labels = read_labels_csv(&path, CsvOptions::default()).unwrap();
        assert_eq!(labels, vec![0, 0, 1, 2, 1]);
    }

    #[test]
    fn out_of_range_label_is_rejected() {
        let view = DenseMatrix::zeros(2, 3);
        // two distinct ids, so the valid range is 0..2
        let err = MultiViewDataset::new(vec![view], Some(vec![0, 2, 0])).unwrap_err();
        assert!(matches!(err, Error::LabelRange { label: 2, clusters: 2 }));
    }

    #[test]
    fn normalize_rows() {
        let v = dmatrix![1.0, 3.0, 2.0; 2.0, 2.0, 2.0; 0.0, 0.5, 1.0];
        let n = normalize_view(&v).unwrap();
        assert_eq!(n.row(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 1.0, 0.5]);
        assert_eq!(n.row(1).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 0.0]);
        assert_eq!(n.row(2).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn normalize_rejects_inf() {
        let v = dmatrix![1.0, f64::INFINITY];
        assert!(matches!(normalize_view(&v), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn concatenate_stacks_views() {
        let a = DenseMatrix::from_fn(4, 10, |i, j| (i * 10 + j) as f64);
        let b = DenseMatrix::from_fn(6, 10, |i, j| (i as f64) - (j as f64));
        let ds = MultiViewDataset::new(vec![a, b], None).unwrap();
        let joint = concatenate(&ds, true).unwrap();
        assert_eq!(joint.x.shape(), (10, 10));
        assert_eq!(joint.view_offsets, vec![0..4, 4..10]);
        for (i, view) in ds.views().iter().enumerate() {
            let norm = normalize_view(view).unwrap();
            for j in 0..10 {
                let r = &joint.view_offsets[i];
                assert_eq!(joint.x.column(j).rows(r.start, r.len()), norm.column(j));
            }
        }
        assert!(joint.x.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn concatenate_single_view() {
        let a = DenseMatrix::from_fn(3, 5, |i, j| (i + 2 * j) as f64);
        let ds = MultiViewDataset::new(vec![a.clone()], None).unwrap();
        let joint = concatenate(&ds, true).unwrap();
        assert_eq!(joint.x, normalize_view(&a).unwrap());
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = DenseMatrix::from_fn(3, 4, |i, j| (i as f64 + 0.1) / (j as f64 + 0.3) * 1e-3);
        write_matrix_csv(&path, &m).unwrap();
        let back = read_matrix_csv(&path, CsvOptions::default()).unwrap();
        assert_eq!(back, m);
    }
}
