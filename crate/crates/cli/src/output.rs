//! CSV tables and JSON verdicts.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// A CSV cell. Floats are written with 17 significant digits.
pub trait Cell {
    fn write_cell(&self, out: &mut String);
}

impl Cell for f64 {
    fn write_cell(&self, out: &mut String) {
        write!(out, "{self:.16e}").unwrap();
    }
}

macro_rules! display_cell {
    ($($t:ty),*) => {$(
        impl Cell for $t {
            fn write_cell(&self, out: &mut String) {
                write!(out, "{self}").unwrap();
            }
        }
    )*};
}
display_cell!(usize, u32, u64, i64, bool, &str, String);

impl<T: Cell> Cell for Option<T> {
    fn write_cell(&self, out: &mut String) {
        if let Some(v) = self {
            v.write_cell(out);
        }
    }
}

/// A CSV table with `# key=value` header lines recording the run.
#[derive(Debug, Clone)]
pub struct Csv {
    head: String,
    columns: Vec<String>,
    body: String,
}

impl Csv {
    pub fn new(suite: &str, seed: u64, columns: &[&str]) -> Self {
        Csv {
            head: format!("# suite={suite}\n# seed={seed}\n"),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            body: String::new(),
        }
    }

    /// Adds a `# key=value` header line.
    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) {
        writeln!(self.head, "# {key}={value}").unwrap();
    }

    pub fn row(&mut self, cells: &[&dyn Cell]) {
        assert_eq!(cells.len(), self.columns.len(), "row width differs from header");
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.body.push(',');
            }
            c.write_cell(&mut self.body);
        }
        self.body.push('\n');
    }

    pub fn render(&self) -> String {
        format!("{}{}\n{}", self.head, self.columns.join(","), self.body)
    }
}

/// One checked claim. `pass` is decided by the suite; `target`,
/// `estimate` and `tolerance` document how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub claim: String,
    pub target: f64,
    pub estimate: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// `|estimate - target| ≤ tolerance`.
    pub fn close(claim: impl Into<String>, target: f64, estimate: f64, tolerance: f64) -> Self {
        let pass = (estimate - target).abs() <= tolerance;
        Check::new(claim, target, estimate, tolerance, pass)
    }

    /// `estimate ≤ target + tolerance`.
    pub fn at_most(claim: impl Into<String>, target: f64, estimate: f64, tolerance: f64) -> Self {
        let pass = estimate <= target + tolerance;
        Check::new(claim, target, estimate, tolerance, pass)
    }

    /// `estimate ≥ target - tolerance`.
    pub fn at_least(claim: impl Into<String>, target: f64, estimate: f64, tolerance: f64) -> Self {
        let pass = estimate >= target - tolerance;
        Check::new(claim, target, estimate, tolerance, pass)
    }

    /// A yes/no claim: target 1, estimate 1 or 0.
    pub fn holds(claim: impl Into<String>, pass: bool) -> Self {
        Check::new(claim, 1.0, if pass { 1.0 } else { 0.0 }, 0.0, pass)
    }

    /// Non-finite numbers have no JSON form; they are stored as the largest
    /// finite value of the same sign and fail the check.
    pub fn new(claim: impl Into<String>, target: f64, estimate: f64, tolerance: f64, pass: bool) -> Self {
        let finite = |x: f64| {
            if x.is_nan() {
                f64::MAX
            } else {
                x.clamp(f64::MIN, f64::MAX)
            }
        };
        let ok = target.is_finite() && estimate.is_finite() && tolerance.is_finite();
        Check {
            claim: claim.into(),
            target: finite(target),
            estimate: finite(estimate),
            tolerance: finite(tolerance),
            pass: pass && ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub suite: String,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl Verdict {
    pub fn new(suite: &str, seed: u64, checks: Vec<Check>) -> Self {
        let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
        Verdict {
            suite: suite.to_string(),
            seed,
            pass,
            checks,
        }
    }

    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("verdicts are plain data");
        s.push('\n');
        s
    }
}

/// What a suite produces: `<suite>.csv` and `<suite>.json`.
#[derive(Debug, Clone)]
pub struct SuiteOutput {
    pub csv: Csv,
    pub verdict: Verdict,
}

impl SuiteOutput {
    pub fn write(&self, out_dir: &Path) -> io::Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(out_dir)?;
        let csv = out_dir.join(format!("{}.csv", self.verdict.suite));
        let json = out_dir.join(format!("{}.json", self.verdict.suite));
        std::fs::write(&csv, self.csv.render())?;
        std::fs::write(&json, self.verdict.to_json())?;
        Ok((csv, json))
    }

    /// One line per check, for the terminal.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.verdict.checks {
            writeln!(
                s,
                "{} {}: estimate {:.6e}, target {:.6e}, tolerance {:.3e}",
                if c.pass { "PASS" } else { "FAIL" },
                c.claim,
                c.estimate,
                c.target,
                c.tolerance
            )
            .unwrap();
        }
        writeln!(
            s,
            "{}: {} ({} of {} checks failed)",
            self.verdict.suite,
            if self.verdict.pass { "pass" } else { "FAIL" },
            self.verdict.failed(),
            self.verdict.checks.len()
        )
        .unwrap();
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut c = Csv::new("demo", 5, &["a", "b", "c"]);
        c.meta("dt", 1e-4);
        c.row(&[&1.0, &"x", &Some(2u32)]);
        c.row(&[&0.1, &true, &None::<f64>]);
        assert_eq!(
            c.render(),
            "# suite=demo\n# seed=5\n# dt=0.0001\na,b,c\n1.0000000000000000e0,x,2\n1.0000000000000001e-1,true,\n"
        );
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2f64.sqrt(), 1e-300, -7.25e10] {
            let mut s = String::new();
            x.write_cell(&mut s);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn check_helpers() {
        assert!(Check::close("c", 1.0, 1.05, 0.1).pass);
        assert!(!Check::close("c", 1.0, 1.2, 0.1).pass);
        assert!(Check::at_most("c", 0.5, 0.55, 0.1).pass);
        assert!(!Check::at_least("c", 0.5, 0.3, 0.1).pass);
        let bad = Check::close("c", 1.0, f64::NAN, 1.0);
        assert!(!bad.pass && bad.estimate.is_finite());
    }

    #[test]
    fn verdict_json_key_order() {
        let v = Verdict::new("demo", 3, vec![Check::holds("it holds", true)]);
        let s = v.to_json();
        let keys: Vec<usize> = [
            "\"suite\"",
            "\"seed\"",
            "\"pass\"",
            "\"checks\"",
            "\"claim\"",
            "\"target\"",
            "\"estimate\"",
            "\"tolerance\"",
        ]
        .iter()
        .map(|k| s.find(k).unwrap())
        .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]), "{s}");
        assert_eq!(serde_json::from_str::<Verdict>(&s).unwrap(), v);
        assert!(!Verdict::new("empty", 0, vec![]).pass);
    }
}
