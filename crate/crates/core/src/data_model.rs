//! Balanced-design bookkeeping, data containers, sufficient statistics and
//! CSV ingestion.

use crate::{Error, Result};

/// The `(p, r)` layout of a balanced one-way experiment: `p >= 2` units with
/// `r >= 2` observations each, `n = p r` in total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct BalancedDesign {
    p: usize,
    r: usize,
}

impl BalancedDesign {
    pub fn new(p: usize, r: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::TooFewGroups(format!("p must be >= 2, got {p}")));
        }
        if r < 2 {
            return Err(Error::TooFewReplicates(format!("r must be >= 2, got {r}")));
        }
        Ok(Self { p, r })
    }

    /// Number of units (groups).
    pub fn p(&self) -> usize {
        self.p
    }

    /// Observations per unit.
    pub fn r(&self) -> usize {
        self.r
    }

    /// Total observations `n = p r`.
    pub fn n(&self) -> usize {
        self.p * self.r
    }
}

/// A `p x r` matrix of observations, `values[i][j] = y_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    design: BalancedDesign,
    values: Vec<f64>, // row-major, unit i at rows i*r..(i+1)*r
}

impl DataMatrix {
    pub fn new(design: BalancedDesign, values: Vec<f64>) -> Result<Self> {
        if values.len() != design.n() {
            return Err(Error::Domain(format!(
                "expected {} values for a {}x{} design, got {}",
                design.n(),
                design.p(),
                design.r(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite observation {bad}")));
        }
        Ok(Self { design, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.len();
        let r = rows.first().map_or(0, Vec::len);
        let design = BalancedDesign::new(p, r)?;
        if rows.iter().any(|row| row.len() != r) {
            return Err(Error::UnbalancedData(
                "rows do not all have the same length".to_string(),
            ));
        }
        Self::new(design, rows.concat())
    }

    pub fn design(&self) -> BalancedDesign {
        self.design
    }

    /// Observations of unit `i`.
    pub fn unit(&self, i: usize) -> &[f64] {
        let r = self.design.r();
        &self.values[i * r..(i + 1) * r]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Everything the Bayes factor needs from the data: the between-group,
/// within-group and total sums of squares plus the means.
///
/// `w_t` is reconciled to `w_h + w_e`, so `w_e / w_t` always lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SufficientStats {
    pub w_h: f64,
    pub w_e: f64,
    pub w_t: f64,
    pub grand_mean: f64,
    pub group_means: Vec<f64>,
    pub design: BalancedDesign,
}

impl SufficientStats {
    /// Synthetic statistics with a prescribed `W_E / W_T`; the Bayes factor
    /// depends on the data only through this ratio, which makes pinning it
    /// useful for asymptotic comparisons.
    pub fn from_ratio(design: BalancedDesign, we_over_wt: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&we_over_wt) {
            return Err(Error::Domain(format!(
                "W_E/W_T must lie in [0, 1], got {we_over_wt}"
            )));
        }
        Ok(Self {
            w_h: 1.0 - we_over_wt,
            w_e: we_over_wt,
            w_t: 1.0,
            grand_mean: 0.0,
            group_means: vec![0.0; design.p()],
            design,
        })
    }
}

/// Two-pass computation of the sums of squares: means first, then centred
/// squares. The ratio `W_E / W_T` drives a Bayes factor exponent of order
/// `n`, so the stable route matters.
pub fn sufficient_stats(data: &DataMatrix) -> SufficientStats {
    let design = data.design();
    let (p, r, n) = (design.p(), design.r(), design.n());

    let grand_mean = data.values().iter().sum::<f64>() / n as f64;
    let group_means: Vec<f64> = (0..p)
        .map(|i| data.unit(i).iter().sum::<f64>() / r as f64)
        .collect();

    let w_h = r as f64
        * group_means
            .iter()
            .map(|m| (m - grand_mean).powi(2))
            .sum::<f64>();
    let w_e = (0..p)
        .map(|i| {
            let m = group_means[i];
            data.unit(i).iter().map(|y| (y - m).powi(2)).sum::<f64>()
        })
        .sum::<f64>();

    SufficientStats {
        w_h,
        w_e,
        w_t: w_h + w_e,
        grand_mean,
        group_means,
        design,
    }
}

/// Parses grouped data from CSV text.
///
/// Contract: UTF-8, first line `group,value` (case-insensitive), then
/// `<label>,<decimal>` rows; LF or CRLF. Units are numbered in order of first
/// appearance. Repeated header lines are tolerated; extra columns are not.
pub fn ingest_csv(text: &str) -> Result<DataMatrix> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: Vec<Vec<f64>> = Vec::new();
    let mut header_seen = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if line.trim().eq_ignore_ascii_case("group,value") {
            header_seen = true;
            continue;
        }
        if !header_seen {
            return Err(Error::MalformedRow {
                line: line_no,
                message: format!("expected header `group,value`, found `{line}`"),
            });
        }
        let mut fields = line.split(',');
        let label = fields.next().unwrap_or_default().trim();
        let value_text = fields.next().ok_or_else(|| Error::MalformedRow {
            line: line_no,
            message: "missing value column".to_string(),
        })?;
        if fields.next().is_some() {
            return Err(Error::MalformedRow {
                line: line_no,
                message: "more than two columns".to_string(),
            });
        }
        if label.is_empty() {
            return Err(Error::MalformedRow {
                line: line_no,
                message: "empty group label".to_string(),
            });
        }
        let value: f64 = value_text
            .trim()
            .parse()
            .map_err(|_| Error::MalformedRow {
                line: line_no,
                message: format!("`{}` is not a number", value_text.trim()),
            })?;
        if !value.is_finite() {
            return Err(Error::MalformedRow {
                line: line_no,
                message: format!("non-finite value {value}"),
            });
        }

        match order.iter().position(|g| g == label) {
            Some(i) => groups[i].push(value),
            None => {
                order.push(label.to_string());
                groups.push(vec![value]);
            }
        }
    }

    if order.len() < 2 {
        return Err(Error::TooFewGroups(format!(
            "need at least 2 groups, found {}",
            order.len()
        )));
    }
    let r = groups[0].len();
    if groups.iter().any(|g| g.len() != r) {
        let counts: Vec<String> = order
            .iter()
            .zip(&groups)
            .map(|(g, v)| format!("{g}: {}", v.len()))
            .collect();
        return Err(Error::UnbalancedData(format!(
            "groups have unequal sizes ({})",
            counts.join(", ")
        )));
    }
    if r < 2 {
        return Err(Error::TooFewReplicates(format!(
            "need at least 2 observations per group, found {r}"
        )));
    }

    DataMatrix::from_rows(&groups)
}

/// Serializes a matrix back to the CSV contract with synthetic labels
/// `g1..gp`. Values use the shortest representation that round-trips, so
/// `ingest_csv(write_csv(m)) == m` exactly.
pub fn write_csv(data: &DataMatrix) -> String {
    let mut out = String::from("group,value\n");
    for i in 0..data.design().p() {
        for y in data.unit(i) {
            out.push_str(&format!("g{},{}\n", i + 1, y));
        }
    }
    out
}
