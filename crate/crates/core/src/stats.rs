//! Summary statistics shared by the experiment reports.

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); zero for fewer than two
/// values.
pub fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        Summary {
            mean: mean(values),
            sd: sample_sd(values),
            n: values.len(),
        }
    }

    /// `mean % (SD)` with two decimals, e.g. `92.73 (0.00)`.
    pub fn percent_cell(&self) -> String {
        if self.n == 0 {
            return "NA".into();
        }
        format!("{:.2} ({:.2})", 100.0 * self.mean, 100.0 * self.sd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_sd() {
        let v = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        assert_eq!(mean(&v), 5.0);
        assert!((sample_sd(&v) - (32.0f64 / 7.0).sqrt()).abs() < 1e-15);
        assert_eq!(sample_sd(&[1.0]), 0.0);
    }

    #[test]
    fn percent_cell_format() {
        let s = Summary::of(&[102.0 / 110.0; 10]);
        assert_eq!(s.percent_cell(), "92.73 (0.00)");
        assert_eq!(Summary::of(&[]).percent_cell(), "NA");
    }
}
