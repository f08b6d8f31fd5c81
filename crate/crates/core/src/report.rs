use std::fmt;

/// Outcome of one numerical check: the worst measured gap against its
/// threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
    pub measured_gap: f64,
    pub threshold: f64,
    /// Free-form context, e.g. the case that produced the worst gap.
    pub detail: String,
}

impl CheckReport {
    /// Passing iff `measured_gap <= threshold`; NaN gaps fail.
    pub fn new(name: impl Into<String>, measured_gap: f64, threshold: f64) -> Self {
        CheckReport {
            name: name.into(),
            pass: measured_gap <= threshold,
            measured_gap,
            threshold,
            detail: String::new(),
        }
    }

    pub fn failed(name: impl Into<String>, detail: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            pass: false,
            measured_gap: f64::NAN,
            threshold: f64::NAN,
            detail: detail.into(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    /// Forces failure while keeping the measured numbers.
    pub fn and(mut self, ok: bool, why: &str) -> Self {
        if !ok {
            self.pass = false;
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(why);
        }
        self
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: gap {:.3e} (threshold {:.3e})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured_gap,
            self.threshold
        )?;
        if !self.detail.is_empty() {
            write!(f, " [{}]", self.detail)?;
        }
        Ok(())
    }
}

/// Tracks the case with the largest gap-to-threshold ratio across many
/// individually-thresholded comparisons.
#[derive(Debug, Clone)]
pub struct WorstCase {
    name: String,
    gap: f64,
    threshold: f64,
    detail: String,
    all_pass: bool,
    cases: usize,
}

impl WorstCase {
    pub fn new(name: impl Into<String>) -> Self {
        WorstCase {
            name: name.into(),
            gap: 0.0,
            threshold: f64::INFINITY,
            detail: String::new(),
            all_pass: true,
            cases: 0,
        }
    }

    pub fn observe(&mut self, gap: f64, threshold: f64, detail: impl FnOnce() -> String) {
        self.cases += 1;
        let ok = gap <= threshold;
        self.all_pass &= ok;
        let ratio = gap / threshold;
        let current = self.gap / self.threshold;
        // NaN ratios count as worse than anything seen so far.
        let worse = !matches!(
            ratio.partial_cmp(&current),
            Some(std::cmp::Ordering::Less | std::cmp::Ordering::Equal)
        );
        if worse || self.cases == 1 {
            self.gap = gap;
            self.threshold = threshold;
            self.detail = detail();
        }
    }

    pub fn cases(&self) -> usize {
        self.cases
    }

    pub fn finish(self) -> CheckReport {
        let threshold = if self.cases == 0 { 0.0 } else { self.threshold };
        CheckReport {
            name: self.name,
            pass: self.all_pass && self.cases > 0,
            measured_gap: self.gap,
            threshold,
            detail: if self.cases == 0 {
                "no cases evaluated".to_string()
            } else {
                format!("{} cases; worst: {}", self.cases, self.detail)
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worst_case_tracks_ratio_not_raw_gap() {
        let mut w = WorstCase::new("t");
        w.observe(1e-3, 1.0, || "big gap loose".into());
        w.observe(1e-6, 1e-7, || "small gap tight".into());
        let r = w.finish();
        assert!(!r.pass);
        assert_eq!(r.measured_gap, 1e-6);
        assert!(r.detail.contains("small gap tight"));
    }

    #[test]
    fn nan_gap_fails() {
        assert!(!CheckReport::new("n", f64::NAN, 1.0).pass);
        let mut w = WorstCase::new("t");
        w.observe(f64::NAN, 1.0, || "nan".into());
        assert!(!w.finish().pass);
        assert!(!WorstCase::new("empty").finish().pass);
    }
}
