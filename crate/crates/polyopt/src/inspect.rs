use std::fmt::Write;

use crate::artifact::Artifact;

/// Per-mask table of an artifact: classification, solution count, matrix
/// size and number of validity certificates.
pub fn report(a: &Artifact) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "format version {}, order {}, problem {}", a.format_version, a.order, a.problem_hash);
    let _ = writeln!(
        s,
        "decision [{}], parameters [{}], {} constraints",
        a.decision_vars.join(", "),
        a.parameters.join(", "),
        a.constraints.len()
    );
    let _ = writeln!(s, "{:>8}  {:<24}  {:<12}  {:>5}  {:>7}  {:>5}", "mask", "active", "class", "count", "matrix", "certs");
    for r in &a.records {
        let active = r.active_constraints.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        let dim = match &r.matrices {
            Some(_) => format!("{0}x{0}", r.solution_count),
            None => "-".into(),
        };
        let _ = writeln!(
            s,
            "{:>8}  {:<24}  {:<12}  {:>5}  {:>7}  {:>5}",
            r.mask,
            format!("{{{active}}}"),
            r.classification,
            r.solution_count,
            dim,
            r.validity_certificates.len()
        );
    }
    let count = |c: &str| a.records.iter().filter(|r| r.classification == c).count();
    let _ = writeln!(
        s,
        "{} active sets: {} records ({} closed-form, {} companion), {} infeasible, {} unresolved",
        a.enumerated,
        a.records.len(),
        count("closed-form"),
        count("companion"),
        a.infeasible_count,
        a.unresolved.len()
    );
    for u in &a.unresolved {
        let _ = writeln!(s, "unresolved {}: {}", u.mask, u.reason);
    }
    s
}
