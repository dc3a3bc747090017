use std::io::Write;

use crate::error::{Error, Result};
use crate::stats::{bonferroni, wilcoxon_signed_rank};

use super::protocols::DocumentPoint;

/// Per-repetition test errors of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub method: String,
    pub mses: Vec<f64>,
    pub mean: f64,
}

impl ExperimentResult {
    pub fn new(method: impl Into<String>, mses: Vec<f64>) -> Self {
        let mean = mses.iter().sum::<f64>() / mses.len() as f64;
        ExperimentResult {
            method: method.into(),
            mses,
            mean,
        }
    }
}

/// Paired comparison of two methods.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub first: String,
    pub second: String,
    pub p_value: f64,
    pub significant: bool,
}

/// Wilcoxon signed-rank tests on every pair of methods with a Bonferroni
/// correction over all pairs.
pub fn pairwise_significance(results: &[ExperimentResult], alpha: f64) -> Result<Vec<Comparison>> {
    let mut pairs = Vec::new();
    let mut pvals = Vec::new();
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            let p = match wilcoxon_signed_rank(&results[i].mses, &results[j].mses) {
                Ok(p) => p,
                Err(Error::AllZeroDifferences) => 1.0,
                Err(e) => return Err(e),
            };
            pairs.push((i, j));
            pvals.push(p);
        }
    }
    let decisions = bonferroni(&pvals, alpha);
    Ok(pairs
        .into_iter()
        .zip(pvals.into_iter().zip(decisions))
        .map(|((i, j), (p_value, significant))| Comparison {
            first: results[i].method.clone(),
            second: results[j].method.clone(),
            p_value,
            significant,
        })
        .collect())
}

/// Writes `# key<TAB>value` metadata, one `rep<TAB>method<TAB>mse` row per
/// repetition and method, and a summary block with means and significance
/// tests.
pub fn write_results<W: Write>(
    mut w: W,
    metadata: &[(&str, String)],
    results: &[ExperimentResult],
) -> Result<()> {
    for (k, v) in metadata {
        writeln!(w, "# {k}\t{v}")?;
    }
    writeln!(w, "rep\tmethod\tmse")?;
    let reps = results.iter().map(|r| r.mses.len()).max().unwrap_or(0);
    for rep in 0..reps {
        for r in results {
            if let Some(m) = r.mses.get(rep) {
                writeln!(w, "{rep}\t{}\t{m:.16e}", r.method)?;
            }
        }
    }
    writeln!(w, "# summary")?;
    writeln!(w, "# method\tmean_mse")?;
    for r in results {
        writeln!(w, "# {}\t{:.16e}", r.method, r.mean)?;
    }
    if reps >= crate::stats::MIN_PAIRS {
        writeln!(w, "# wilcoxon\tfirst\tsecond\tp_value\tsignificant")?;
        for c in pairwise_significance(results, 0.05)? {
            writeln!(
                w,
                "# wilcoxon\t{}\t{}\t{:.16e}\t{}",
                c.first, c.second, c.p_value, c.significant
            )?;
        }
    }
    Ok(())
}

/// Document results: one `size<TAB>rep<TAB>method<TAB>mse` row per run and
/// a summary of means per size.
pub fn write_document_results<W: Write>(
    mut w: W,
    metadata: &[(&str, String)],
    points: &[DocumentPoint],
) -> Result<()> {
    for (k, v) in metadata {
        writeln!(w, "# {k}\t{v}")?;
    }
    writeln!(w, "size\trep\tmethod\tmse")?;
    for p in points {
        for r in &p.results {
            for (rep, m) in r.mses.iter().enumerate() {
                writeln!(w, "{}\t{rep}\t{}\t{m:.16e}", p.size, r.method)?;
            }
        }
    }
    writeln!(w, "# summary")?;
    if let Some(first) = points.first() {
        let names: Vec<&str> = first.results.iter().map(|r| r.method.as_str()).collect();
        writeln!(w, "# size\t{}", names.join("\t"))?;
    }
    for p in points {
        let means: Vec<String> = p.results.iter().map(|r| format!("{:.16e}", r.mean)).collect();
        writeln!(w, "# {}\t{}", p.size, means.join("\t"))?;
    }
    Ok(())
}
