use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ExperimentRecord, HarnessError, Method};

const Z95: f64 = 1.96;

/// Mean and normal-approximation 95% interval of one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub num_nodes: usize,
    pub method: Method,
    /// Successful records in the group.
    pub count: usize,
    pub failed: usize,
    pub mean_ratio: f64,
    pub ratio_half_width: f64,
    pub mean_energy_ratio: Option<f64>,
    pub energy_half_width: Option<f64>,
}

impl SummaryRow {
    pub fn ratio_ci(&self) -> (f64, f64) {
        (self.mean_ratio - self.ratio_half_width, self.mean_ratio + self.ratio_half_width)
    }
}

/// Rows sorted by `(num_nodes, method)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    pub fn get(&self, num_nodes: usize, method: Method) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.num_nodes == num_nodes && r.method == method)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "num_nodes,method,count,failed,mean_ratio,ratio_ci_low,ratio_ci_high,\
             mean_energy_ratio,energy_ci_low,energy_ci_high\n",
        );
        for r in &self.rows {
            let (lo, hi) = r.ratio_ci();
            let (em, elo, ehi) = match (r.mean_energy_ratio, r.energy_half_width) {
                (Some(m), Some(h)) => (m.to_string(), (m - h).to_string(), (m + h).to_string()),
                _ => Default::default(),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{lo},{hi},{em},{elo},{ehi}\n",
                r.num_nodes, r.method, r.count, r.failed, r.mean_ratio
            ));
        }
        out
    }
}

/// Mean and `1.96·s/√n` with the sample standard deviation.
fn mean_ci(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Z95 * (var / n).sqrt())
}

/// Groups successful records by `(num_nodes, method)`. Failed records are
/// counted but do not enter the statistics.
pub fn aggregate(records: &[ExperimentRecord]) -> Result<Summary, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::Empty);
    }
    let mut groups: BTreeMap<(usize, Method), Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.num_nodes, r.method)).or_default().push(r);
    }
    let mut rows = Vec::with_capacity(groups.len());
    for ((num_nodes, method), recs) in groups {
        let ratios: Vec<f64> = recs.iter().filter(|r| r.is_ok()).filter_map(|r| r.ratio).collect();
        if ratios.len() < 2 {
            return Err(HarnessError::InsufficientData {
                num_nodes,
                method,
                count: ratios.len(),
            });
        }
        let (mean_ratio, ratio_half_width) = mean_ci(&ratios);
        let energies: Vec<f64> = recs
            .iter()
            .filter(|r| r.is_ok())
            .filter_map(|r| r.energy_ratio)
            .collect();
        let (mean_energy_ratio, energy_half_width) = if energies.len() >= 2 {
            let (m, h) = mean_ci(&energies);
            (Some(m), Some(h))
        } else {
            (None, None)
        };
        rows.push(SummaryRow {
            num_nodes,
            method,
            count: ratios.len(),
            failed: recs.len() - ratios.len(),
            mean_ratio,
            ratio_half_width,
            mean_energy_ratio,
            energy_half_width,
        });
    }
    Ok(Summary { rows })
}

/// Change in mean approximation ratio from a noiseless to a noisy run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseImpact {
    pub num_nodes: usize,
    pub method: Method,
    pub count: usize,
    pub noiseless_mean: f64,
    pub noisy_mean: f64,
    /// `noiseless_mean − noisy_mean`.
    pub drop: f64,
    /// The two 95% intervals do not overlap.
    pub significant: bool,
}

pub fn compare_noise_impact(
    noiseless: &Summary,
    noisy: &Summary,
) -> Result<Vec<NoiseImpact>, HarnessError> {
    let keys = |s: &Summary| s.rows.iter().map(|r| (r.num_nodes, r.method)).collect::<Vec<_>>();
    if keys(noiseless) != keys(noisy) {
        return Err(HarnessError::GroupMismatch(format!(
            "{:?} vs {:?}",
            keys(noiseless),
            keys(noisy)
        )));
    }
    Ok(noiseless
        .rows
        .iter()
        .zip(&noisy.rows)
        .map(|(a, b)| {
            let (alo, ahi) = a.ratio_ci();
            let (blo, bhi) = b.ratio_ci();
            NoiseImpact {
                num_nodes: a.num_nodes,
                method: a.method,
                count: a.count.min(b.count),
                noiseless_mean: a.mean_ratio,
                noisy_mean: b.mean_ratio,
                drop: a.mean_ratio - b.mean_ratio,
                significant: alo > bhi || blo > ahi,
            }
        })
        .collect())
}

/// Per-method drop pooled over sizes, weighting each size by its record
/// count.
pub fn overall_drops(impacts: &[NoiseImpact]) -> BTreeMap<Method, f64> {
    let mut acc: BTreeMap<Method, (f64, usize)> = BTreeMap::new();
    for i in impacts {
        let e = acc.entry(i.method).or_default();
        e.0 += i.drop * i.count as f64;
        e.1 += i.count;
    }
    acc.into_iter().map(|(m, (s, n))| (m, s / n as f64)).collect()
}
