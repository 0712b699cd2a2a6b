//! Small pass/fail bookkeeping shared by the identity-checking entry points.
//!
//! Routines that verify a bundle of symbolic identities return a
//! [`CheckReport`]: an ordered list of named checks, each carrying the
//! [`Verdict`] of the zero test that was run for it. The report preserves
//! insertion order so output is deterministic.

use std::fmt;

use crate::symexpr::zerotest::Verdict;

/// One named identity check together with the verdict of its zero test.
#[derive(Debug, Clone)]
pub struct IdentityCheck {
    /// Human-readable name of the identity, unique within its report.
    pub name: String,
    /// Outcome of the zero test.
    pub verdict: Verdict,
}

/// An ordered bundle of identity checks under a common title.
#[derive(Debug, Clone)]
pub struct CheckReport {
    /// What the bundle as a whole verifies.
    pub title: String,
    /// The checks, in the order they were run.
    pub checks: Vec<IdentityCheck>,
}

impl CheckReport {
    /// Create an empty report.
    pub fn new(title: impl Into<String>) -> CheckReport {
        CheckReport {
            title: title.into(),
            checks: Vec::new(),
        }
    }

    /// Append a check.
    pub fn push(&mut self, name: impl Into<String>, verdict: Verdict) {
        self.checks.push(IdentityCheck {
            name: name.into(),
            verdict,
        });
    }

    /// True when every check certifies zero (proven or probable).
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict.is_zero())
    }

    /// True when every check is an exact proof of zero.
    pub fn all_proven(&self) -> bool {
        self.checks.iter().all(|c| c.verdict.is_proven())
    }

    /// Look up a check by name.
    pub fn find(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        for check in &self.checks {
            let tag = if check.verdict.is_zero() { "ok " } else { "FAIL" };
            writeln!(f, "  [{tag}] {}: {}", check.name, check.verdict)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_passes_only_when_all_checks_are_zero() {
        let mut r = CheckReport::new("demo");
        r.push("first", Verdict::ProvenZero);
        r.push("second", Verdict::ProbablyZero { samples: 32 });
        assert!(r.passed());
        assert!(!r.all_proven());
        assert!(r.find("second").is_some());
        assert!(r.find("third").is_none());
        let shown = r.to_string();
        assert!(shown.contains("[ok ] first: proven-zero"));
        assert!(shown.contains("probably-zero(32)"));
    }
}
