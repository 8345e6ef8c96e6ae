//! Per-entry consistency checks of the appendix against the library.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::appendix::AppendixEntry;
use crate::contour::z_series_contour;
use crate::gauss::{check_mainthm_hypotheses, ellsum_sweep};
use crate::plumbing::{canonicalize, is_pu};
use crate::theta::{alpha_set, derive_family_params, leading_exponent, lemma52_check, shift_constant, sign_vectors, z_series, FamilyParams};
use crate::{Integer, Rational};

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Largest denominator in the quantum-set sweep.
    pub kmax: i64,
    /// The dual-route comparison covers exponents below the leading one plus this.
    pub series_window: Rational,
    /// Restrict to these entry indices.
    pub entries: Option<Vec<usize>>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { kmax: 12, series_window: Rational::from_integer(Integer::from(20)), entries: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct EntryReport {
    pub index: usize,
    pub labels: String,
    pub checks: Vec<CheckResult>,
    pub millis: u128,
}

impl EntryReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub entries: Vec<EntryReport>,
    pub millis: u128,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(EntryReport::passed)
    }

    /// One line per entry, failing checks named with their details.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            if e.passed() {
                let _ = writeln!(s, "entry {:>2} {} ok ({} ms)", e.index, e.labels, e.millis);
            } else {
                let fails: Vec<String> = e.failures().iter().map(|c| format!("{}: {}", c.name, c.detail)).collect();
                let _ = writeln!(s, "entry {:>2} {} FAILED: {}", e.index, e.labels, fails.join("; "));
            }
        }
        let bad = self.entries.iter().filter(|e| !e.passed()).count();
        let _ = writeln!(s, "{} entries, {} failing, {} ms", self.entries.len(), bad, self.millis);
        s
    }
}

/// `{x mod n, -x mod n}`.
fn reflection_pair(x: &Integer, n: &Integer) -> [Integer; 2] {
    use num_integer::Integer as _;
    let a = x.mod_floor(n);
    let b = (n - x).mod_floor(n);
    if a <= b {
        [a, b]
    } else {
        [b, a]
    }
}

/// Family parameters agree up to `r -> N - r` on each residue.
pub fn family_params_match(a: &FamilyParams, b: &FamilyParams) -> bool {
    a.n1 == b.n1
        && a.n2 == b.n2
        && reflection_pair(&a.r1, &a.n1) == reflection_pair(&b.r1, &b.n1)
        && reflection_pair(&a.s1, &a.n1) == reflection_pair(&b.s1, &b.n1)
        && reflection_pair(&a.r2, &a.n2) == reflection_pair(&b.r2, &b.n2)
        && reflection_pair(&a.s2, &a.n2) == reflection_pair(&b.s2, &b.n2)
}

fn check(name: &'static str, f: impl FnOnce() -> crate::Result<(bool, String)>) -> CheckResult {
    match f() {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult { name, passed: false, detail: e.to_string() },
    }
}

/// Runs every check on one entry.
pub fn verify_entry(e: &AppendixEntry, opts: &VerifyOptions) -> EntryReport {
    let start = Instant::now();
    let h = &e.labels;
    let mut checks = Vec::new();
    checks.push(check("labels_pu", || {
        let canon = canonicalize(h) == *h;
        Ok((is_pu(h) && canon, format!("pu={} canonical={canon}", is_pu(h))))
    }));
    checks.push(check("c_match", || {
        let c = shift_constant(h);
        Ok((c == e.c, format!("labels give {c}, table has {}", e.c)))
    }));
    let derived = derive_family_params(h);
    checks.push(check("q_match", || {
        let (_, q) = derived.clone()?;
        Ok((q == e.q, format!("labels give {q}, table has {}", e.q)))
    }));
    checks.push(check("family_params", || {
        let (p, _) = derived.clone()?;
        Ok((family_params_match(&p, &e.params), format!("labels give {p:?}")))
    }));
    checks.push(check("alpha_set", || {
        let from_labels = alpha_set(h)?.as_set();
        let from_table = e.params.signed_set()?.as_set();
        Ok((from_labels == from_table, format!("{} points from labels, {} from table", from_labels.len(), from_table.len())))
    }));
    checks.push(check("hypotheses", || {
        let r = check_mainthm_hypotheses(&e.params, &e.q);
        Ok((r.all_pass(), r.failures().join(",")))
    }));
    checks.push(check("ellsum_sweep", || {
        let rows = ellsum_sweep(&e.params, &e.q, opts.kmax)?;
        let bad: Vec<String> = rows.iter().filter(|(_, _, z)| !z).map(|(k, hh, _)| format!("{hh}/{k}")).collect();
        Ok((bad.is_empty(), format!("{} points up to k = {}, nonvanishing: [{}]", rows.len(), opts.kmax, bad.join(" "))))
    }));
    checks.push(check("quadratic_identity", || {
        let mut bad = 0;
        for eps in sign_vectors() {
            for n1 in -3..=3 {
                for n2 in -3..=3 {
                    if !lemma52_check(h, [n1, n2], eps)? {
                        bad += 1;
                    }
                }
            }
        }
        Ok((bad == 0, format!("{bad} failing cases")))
    }));
    checks.push(check("dual_route", || {
        let cutoff = leading_exponent(h)? + &opts.series_window;
        let a = z_series(h, &cutoff)?;
        let b = z_series_contour(h, &cutoff)?;
        Ok((a == b && !a.is_empty(), format!("{} terms below {cutoff}", a.len())))
    }));
    EntryReport { index: e.index, labels: e.printed_labels.to_string(), checks, millis: start.elapsed().as_millis() }
}

/// Checks the selected entries in parallel; the report keeps table order.
pub fn verify_appendix(entries: &[AppendixEntry], opts: &VerifyOptions) -> VerificationReport {
    let start = Instant::now();
    let selected: Vec<&AppendixEntry> = entries
        .iter()
        .filter(|e| opts.entries.as_ref().is_none_or(|s| s.contains(&e.index)))
        .collect();
    let reports = selected.par_iter().map(|e| verify_entry(e, opts)).collect();
    VerificationReport { entries: reports, millis: start.elapsed().as_millis() }
}

/// The printed `c` equals the value computed from the labels.
pub fn c_is_consistent(e: &AppendixEntry) -> bool {
    shift_constant(&e.labels) == e.c
}
