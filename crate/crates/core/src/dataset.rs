use crate::error::{Error, Result};

/// Binary classification records with `M` binary protected attributes.
///
/// Attributes are stored row-major. Every value is validated to be `0` or `1`
/// at construction, and a view always holds at least one row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetView {
    m: usize,
    attrs: Vec<u8>,
    y_true: Vec<u8>,
    y_pred: Option<Vec<u8>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Row<'a> {
    pub attrs: &'a [u8],
    pub y_true: u8,
    pub y_pred: Option<u8>,
}

fn check_bit(row: usize, what: &str, v: u8) -> Result<()> {
    if v > 1 {
        return Err(Error::MalformedRow {
            row,
            reason: format!("{what} is {v}, expected 0 or 1"),
        });
    }
    Ok(())
}

impl DatasetView {
    pub fn new(m: usize, attrs: Vec<u8>, y_true: Vec<u8>, y_pred: Option<Vec<u8>>) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("a dataset needs at least one protected attribute".into()));
        }
        if y_true.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let n = y_true.len();
        if attrs.len() != n * m {
            return Err(Error::MalformedRow {
                row: attrs.len() / m,
                reason: format!("{} attribute values for {n} rows of width {m}", attrs.len()),
            });
        }
        if let Some(p) = &y_pred {
            if p.len() != n {
                return Err(Error::Mode(format!("{} predictions for {n} rows", p.len())));
            }
        }
        for row in 0..n {
            for (j, &a) in attrs[row * m..(row + 1) * m].iter().enumerate() {
                check_bit(row, &format!("attribute {j}"), a)?;
            }
            check_bit(row, "label", y_true[row])?;
            if let Some(p) = &y_pred {
                check_bit(row, "prediction", p[row])?;
            }
        }
        Ok(DatasetView {
            m,
            attrs,
            y_true,
            y_pred,
        })
    }

    /// Attach (or replace) predictions.
    pub fn with_predictions(self, y_pred: Vec<u8>) -> Result<Self> {
        DatasetView::new(self.m, self.attrs, self.y_true, Some(y_pred))
    }

    pub fn without_predictions(mut self) -> Self {
        self.y_pred = None;
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.y_true.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_true.is_empty()
    }

    pub fn has_predictions(&self) -> bool {
        self.y_pred.is_some()
    }

    pub fn attrs(&self, row: usize) -> &[u8] {
        &self.attrs[row * self.m..(row + 1) * self.m]
    }

    pub fn y_true(&self, row: usize) -> u8 {
        self.y_true[row]
    }

    pub fn y_pred(&self, row: usize) -> Option<u8> {
        self.y_pred.as_ref().map(|p| p[row])
    }

    pub fn labels(&self) -> &[u8] {
        &self.y_true
    }

    pub fn predictions(&self) -> Option<&[u8]> {
        self.y_pred.as_deref()
    }

    pub fn row(&self, row: usize) -> Row<'_> {
        Row {
            attrs: self.attrs(row),
            y_true: self.y_true[row],
            y_pred: self.y_pred(row),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = Row<'_>> + '_ {
        (0..self.len()).map(move |i| self.row(i))
    }

    /// Vertex of each row as an `M`-bit code, attribute 0 in the highest bit.
    pub fn vertex_code(&self, row: usize) -> usize {
        self.attrs(row)
            .iter()
            .fold(0usize, |acc, &a| (acc << 1) | a as usize)
    }

    /// A new view holding the given rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut attrs = Vec::with_capacity(rows.len() * self.m);
        for &r in rows {
            attrs.extend_from_slice(self.attrs(r));
        }
        Ok(DatasetView {
            m: self.m,
            attrs,
            y_true: rows.iter().map(|&r| self.y_true[r]).collect(),
            y_pred: self
                .y_pred
                .as_ref()
                .map(|p| rows.iter().map(|&r| p[r]).collect()),
        })
    }
}

/// Incremental construction, validating each row as it arrives.
#[derive(Clone, Debug)]
pub struct DatasetBuilder {
    m: usize,
    attrs: Vec<u8>,
    y_true: Vec<u8>,
    y_pred: Option<Vec<u8>>,
}

impl DatasetBuilder {
    pub fn new(m: usize, with_predictions: bool) -> Self {
        DatasetBuilder {
            m,
            attrs: Vec::new(),
            y_true: Vec::new(),
            y_pred: with_predictions.then(Vec::new),
        }
    }

    pub fn with_capacity(mut self, rows: usize) -> Self {
        self.attrs.reserve(rows * self.m);
        self.y_true.reserve(rows);
        if let Some(p) = &mut self.y_pred {
            p.reserve(rows);
        }
        self
    }

    pub fn len(&self) -> usize {
        self.y_true.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_true.is_empty()
    }

    pub fn push(&mut self, attrs: &[u8], y_true: u8, y_pred: Option<u8>) -> Result<()> {
        let row = self.len();
        if attrs.len() != self.m {
            return Err(Error::MalformedRow {
                row,
                reason: format!("{} attributes, expected {}", attrs.len(), self.m),
            });
        }
        for (j, &a) in attrs.iter().enumerate() {
            check_bit(row, &format!("attribute {j}"), a)?;
        }
        check_bit(row, "label", y_true)?;
        match (&mut self.y_pred, y_pred) {
            (Some(p), Some(v)) => {
                check_bit(row, "prediction", v)?;
                p.push(v);
            }
            (None, None) => {}
            (Some(_), None) => {
                return Err(Error::MalformedRow {
                    row,
                    reason: "missing prediction".into(),
                })
            }
            (None, Some(_)) => {
                return Err(Error::Mode("prediction given to a label-only builder".into()))
            }
        }
        self.attrs.extend_from_slice(attrs);
        self.y_true.push(y_true);
        Ok(())
    }

    pub fn build(self) -> Result<DatasetView> {
        if self.y_true.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(DatasetView {
            m: self.m,
            attrs: self.attrs,
            y_true: self.y_true,
            y_pred: self.y_pred,
        })
    }
}
