use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// One checked identity. `pass` is always `residual <= tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub case_id: String,
    pub identity: String,
    /// Family of the identity, e.g. "wavepacket" or "landau".
    pub tag: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Conventions and normalization variants the check consumed.
    pub variant: String,
    #[serde(default)]
    pub extra: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl VerificationReport {
    pub fn new(case_id: &str, identity: &str, tag: &str, residual: f64, tolerance: f64, variant: &str) -> Self {
        VerificationReport {
            case_id: case_id.to_string(),
            identity: identity.to_string(),
            tag: tag.to_string(),
            residual,
            tolerance,
            pass: residual <= tolerance,
            variant: variant.to_string(),
            extra: BTreeMap::new(),
            error: None,
        }
    }

    /// A case that could not be evaluated; it never passes.
    pub fn failed(case_id: &str, identity: &str, tag: &str, tolerance: f64, message: String) -> Self {
        let mut r = VerificationReport::new(case_id, identity, tag, f64::MAX, tolerance, "none");
        r.pass = false;
        r.error = Some(message);
        r
    }

    pub fn with_extra(mut self, key: &str, value: f64) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.pass = self.error.is_none() && self.residual <= tolerance;
        self
    }

    pub fn summary_line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        match &self.error {
            Some(e) => format!("{status} {:<32} error: {e}", self.case_id),
            None => format!("{status} {:<32} residual {:.3e} (tol {:.1e})", self.case_id, self.residual, self.tolerance),
        }
    }
}

/// One eigenpair of an eigen-report; `j`/`k` label analytically known states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenEntry {
    pub index: usize,
    pub j: Option<usize>,
    pub k: Option<usize>,
    pub level: f64,
    pub residual: f64,
    pub cluster: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    /// Sorted by level, ascending.
    pub entries: Vec<EigenEntry>,
    pub clusters: Vec<Vec<usize>>,
    pub cluster_tol: f64,
    pub gram_deviation: Option<f64>,
    pub boundary_mass: Option<f64>,
    pub grid: String,
    pub symbol: String,
    pub route: String,
}

impl EigenReport {
    /// Sorts the raw entries by level (ties by label) and groups them into clusters.
    pub fn build(mut entries: Vec<EigenEntry>, cluster_tol: f64, grid: String, symbol: String, route: String) -> Self {
        entries.sort_by(|a, b| a.level.total_cmp(&b.level).then(a.j.cmp(&b.j)).then(a.k.cmp(&b.k)));
        let levels: Vec<f64> = entries.iter().map(|e| e.level).collect();
        let clusters = cluster_levels(&levels, cluster_tol);
        for (c, members) in clusters.iter().enumerate() {
            for &m in members {
                entries[m].cluster = c;
            }
        }
        for (i, e) in entries.iter_mut().enumerate() {
            e.index = i;
        }
        EigenReport { entries, clusters, cluster_tol, gram_deviation: None, boundary_mass: None, grid, symbol, route }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.level).collect()
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.residual).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.residual))
    }

    /// CSV of (index, j, k, level, residual, cluster); unlabeled states leave j, k empty.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,j,k,level,residual,cluster\n");
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        for e in &self.entries {
            let _ = writeln!(s, "{},{},{},{:.15e},{:.6e},{}", e.index, opt(e.j), opt(e.k), e.level, e.residual, e.cluster);
        }
        s
    }
}

/// Groups sorted values so that every group spans at most `tol`; each member is then
/// within `tol` of its group mean.
pub fn cluster_levels(sorted: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut start = f64::NAN;
    for (i, &v) in sorted.iter().enumerate() {
        match out.last_mut() {
            Some(c) if v - start <= tol => c.push(i),
            _ => {
                out.push(vec![i]);
                start = v;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pass_tracks_tolerance() {
        let r = VerificationReport::new("c", "i", "t", 1e-9, 1e-8, "v");
        assert!(r.pass);
        assert!(!r.clone().with_tolerance(1e-12).pass);
        let f = VerificationReport::failed("c", "i", "t", 1.0, "boom".into());
        assert!(!f.with_tolerance(f64::MAX).pass);
    }

    proptest! {
        #[test]
        fn clusters_partition_and_stay_tight(mut v in proptest::collection::vec(-10.0f64..10.0, 0..40), tol in 1e-6f64..1.0) {
            v.sort_by(f64::total_cmp);
            let cs = cluster_levels(&v, tol);
            let flat: Vec<usize> = cs.iter().flatten().copied().collect();
            prop_assert_eq!(flat, (0..v.len()).collect::<Vec<_>>());
            for c in &cs {
                let mean = c.iter().map(|&i| v[i]).sum::<f64>() / c.len() as f64;
                for &i in c {
                    prop_assert!((v[i] - mean).abs() <= tol);
                }
            }
        }
    }
}
