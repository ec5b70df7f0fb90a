//! Sub-CDAG family counts and disjointness.

use super::{LemmaError, LemmaVerdict, Tally};
use crate::builders::{BuildError, BuildReport, StrassenLikeSpec};
use crate::cdag::Cdag;

/// Members guaranteed at `level`, and whether the count is exact: `7^i` for
/// Strassen's algorithm, at least `m0^(i-2)` (one below level 2) for a
/// Strassen-like scheme.
pub fn claimed_members(g: &Cdag, level: usize) -> Result<(usize, bool), LemmaError> {
    let meta = g.meta();
    match meta.builder.as_str() {
        "strassen" => Ok((7usize.pow(level as u32), true)),
        "like" => {
            let spec: StrassenLikeSpec = serde_json::from_value(meta.params["spec"].clone())
                .map_err(|e| BuildError::InvalidSpec(e.to_string()))?;
            let c = if level < 2 { 1 } else { spec.m0.pow(level as u32 - 2) };
            Ok((c, false))
        }
        other => Err(BuildError::InvalidSpec(format!("no family guarantee for `{other}` graphs")).into()),
    }
}

/// Re-checks pairwise disjointness of the family at `level` and compares
/// the member count with the guarantee.
pub fn verify_family_disjointness(
    g: &Cdag,
    report: &BuildReport,
    level: usize,
) -> Result<LemmaVerdict, LemmaError> {
    let mut t = Tally::new("families");
    let Some(fam) = report.families.iter().find(|f| f.level == level) else {
        t.record(Some(format!("no family at level {level}")));
        return Ok(t.finish());
    };
    let (claim, exact) = claimed_members(g, level)?;
    let count = fam.members.len();
    let ok = if exact { count == claim } else { count >= claim };
    t.record((!ok).then(|| {
        let rel = if exact { "exactly" } else { "at least" };
        format!("level {level}: {count} members, expected {rel} {claim}")
    }));

    let mut owner = vec![usize::MAX; g.vertex_count()];
    for (k, m) in fam.members.iter().enumerate() {
        let mut clash = None;
        for &v in m {
            let o = &mut owner[v as usize];
            if *o != usize::MAX && clash.is_none() {
                clash = Some(format!("members {} and {k} share {}", *o, g.id(v)));
            }
            *o = k;
        }
        t.record(clash);
    }
    Ok(t.finish())
}
