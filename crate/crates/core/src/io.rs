//! JSON and CSV interchange. All output is deterministic: struct fields
//! serialize in declaration order, collections are sorted before writing,
//! and rationals travel as exact "p/q" strings.

use std::collections::BTreeSet;

use num::{BigInt, BigRational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{PartialBijection, PermFamily, Permutation, RestrictionClass};
use crate::pseudorandom::{PseudorandomnessReport, ReportKind, Threshold};
use crate::regularity::Decomposition;
use crate::rep::{cayley_eigenvalue, dimension_hook, generator_count, partitions_of};
use crate::surgery::{StepKind, SurgeryStep};

pub fn rational_to_string(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn rational_from_string(s: &str) -> Result<BigRational> {
    let (num, den) = s
        .split_once('/')
        .ok_or_else(|| Error::InvalidInput(format!("expected \"p/q\", got {s:?}")))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::InvalidInput(format!("cannot parse integer {t:?}")))
    };
    let den = parse(den)?;
    if den == BigInt::from(0) {
        return Err(Error::InvalidInput("zero denominator".into()));
    }
    Ok(BigRational::new(parse(num)?, den))
}

fn pb_pairs(pb: &PartialBijection) -> Vec<[usize; 2]> {
    pb.one_indexed().into_iter().map(|(x, y)| [x, y]).collect()
}

fn pb_from_pairs(pairs: &[[usize; 2]]) -> Result<PartialBijection> {
    for p in pairs {
        if p[0] == 0 || p[1] == 0 {
            return Err(Error::InvalidInput(
                "constraint points are 1-indexed and must be positive".into(),
            ));
        }
    }
    PartialBijection::from_one_indexed(
        &pairs.iter().map(|p| (p[0], p[1])).collect::<Vec<_>>(),
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AmbientDoc {
    agree: Vec<Vec<[usize; 2]>>,
    disagree: Vec<Vec<[usize; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FamilyDoc {
    n: usize,
    ambient: AmbientDoc,
    /// Members as 1-indexed image rows.
    members: Vec<Vec<usize>>,
}

pub fn family_to_json(f: &PermFamily) -> String {
    let doc = FamilyDoc {
        n: f.n(),
        ambient: AmbientDoc {
            agree: f
                .ambient()
                .agree_constraints()
                .iter()
                .map(pb_pairs)
                .collect(),
            disagree: f
                .ambient()
                .disagree_constraints()
                .iter()
                .map(pb_pairs)
                .collect(),
        },
        members: f.members().map(|m| m.one_indexed()).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serializable document")
}

pub fn family_from_json(text: &str) -> Result<PermFamily> {
    let doc: FamilyDoc = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("malformed family JSON: {e}")))?;
    let agree = doc
        .ambient
        .agree
        .iter()
        .map(|c| pb_from_pairs(c))
        .collect::<Result<Vec<_>>>()?;
    let disagree = doc
        .ambient
        .disagree
        .iter()
        .map(|c| pb_from_pairs(c))
        .collect::<Result<Vec<_>>>()?;
    let ambient = RestrictionClass::new(doc.n, agree, disagree)?;
    let mut members = BTreeSet::new();
    for row in &doc.members {
        if row.len() != doc.n {
            return Err(Error::InvalidInput(format!(
                "member row has {} images but n = {}",
                row.len(),
                doc.n
            )));
        }
        members.insert(Permutation::from_one_indexed(row)?);
    }
    PermFamily::new(ambient, members)
}

/// Eigenvalue table of the agreement-`a` Cayley graph:
/// partition,dimension,lambda_num,lambda_den,lambda_float rows, one per
/// partition of n in the canonical enumeration order.
pub fn spectrum_csv(n: usize, a: usize) -> Result<String> {
    if n > 8 {
        return Err(Error::ResourceLimit(format!(
            "dense spectrum tables support n <= 8, got n = {n}"
        )));
    }
    let mut out = String::from("partition,dimension,lambda_num,lambda_den,lambda_float\n");
    let edgeless = generator_count(n, a) == 0u32.into();
    for alpha in partitions_of(n) {
        let dim = dimension_hook(&alpha);
        let lambda = if edgeless {
            BigRational::from_integer(BigInt::from(0))
        } else {
            cayley_eigenvalue(&alpha, a)?
        };
        let float = crate::pseudorandom::rational_to_f64(&lambda);
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            alpha.render(),
            dim,
            lambda.numer(),
            lambda.denom(),
            float
        ));
    }
    Ok(out)
}

fn kind_name(kind: ReportKind) -> &'static str {
    match kind {
        ReportKind::Captureable => "captureable",
        ReportKind::Quasiregular => "quasiregular",
        ReportKind::Quasirandom => "quasirandom",
    }
}

#[derive(Debug, Clone, Serialize)]
struct ReportDoc {
    kind: &'static str,
    size_parameter: usize,
    threshold: String,
    verdict: bool,
    witness: Option<Vec<[usize; 2]>>,
    attained: String,
}

pub fn report_to_json(r: &PseudorandomnessReport) -> String {
    let doc = ReportDoc {
        kind: kind_name(r.kind),
        size_parameter: r.size_parameter,
        threshold: r.threshold.to_string(),
        verdict: r.verdict,
        witness: r.witness.as_ref().map(pb_pairs),
        attained: rational_to_string(&r.attained),
    };
    serde_json::to_string_pretty(&doc).expect("serializable document")
}

/// Parses a threshold: either an exact rational ("p/q" or an integer) or
/// "c*sqrt(m)" / "sqrt(m)".
pub fn threshold_from_string(s: &str) -> Result<Threshold> {
    let s = s.trim();
    if let Some(rest) = s.strip_suffix(')') {
        let (coeff, radicand) = match rest.split_once("*sqrt(") {
            Some((c, m)) => (c, m),
            None => match rest.strip_prefix("sqrt(") {
                Some(m) => ("1/1", m),
                None => {
                    return Err(Error::InvalidInput(format!(
                        "cannot parse threshold {s:?}"
                    )))
                }
            },
        };
        let coeff = if coeff.contains('/') {
            rational_from_string(coeff)?
        } else {
            BigRational::from_integer(coeff.trim().parse::<BigInt>().map_err(|_| {
                Error::InvalidInput(format!("cannot parse coefficient {coeff:?}"))
            })?)
        };
        let radicand: usize = radicand.trim().parse().map_err(|_| {
            Error::InvalidInput(format!("cannot parse radicand {radicand:?}"))
        })?;
        return Ok(Threshold::sqrt_times(coeff, radicand));
    }
    if s.contains('/') {
        return Ok(Threshold::Rational(rational_from_string(s)?));
    }
    Ok(Threshold::Rational(BigRational::from_integer(
        s.parse::<BigInt>()
            .map_err(|_| Error::InvalidInput(format!("cannot parse threshold {s:?}")))?,
    )))
}

#[derive(Debug, Clone, Serialize)]
struct SliceDoc {
    restriction: Vec<[usize; 2]>,
    members: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
struct DecompositionDoc {
    junta: Vec<Vec<[usize; 2]>>,
    slices: Vec<SliceDoc>,
    remainder: Vec<Vec<usize>>,
    tree: Vec<String>,
}

pub fn decomposition_to_json(d: &Decomposition) -> String {
    let doc = DecompositionDoc {
        junta: d.junta.generators().iter().map(pb_pairs).collect(),
        slices: d
            .slices
            .iter()
            .map(|(pi, fam)| SliceDoc {
                restriction: pb_pairs(pi),
                members: fam.members().map(|m| m.one_indexed()).collect(),
            })
            .collect(),
        remainder: d.remainder.members().map(|m| m.one_indexed()).collect(),
        tree: d.tree.render().lines().map(str::to_owned).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serializable document")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StepDoc {
    kind: String,
    n_before: usize,
    n_after: usize,
    interchanged: bool,
    left2: Option<Vec<usize>>,
    right1: Option<Vec<usize>>,
    right2: Option<Vec<usize>>,
    deleted: Vec<[usize; 2]>,
    x_map: Vec<Option<usize>>,
    y_map: Vec<Option<usize>>,
}

pub fn step_to_json(step: &SurgeryStep) -> String {
    let perm = |p: &Option<Permutation>| p.as_ref().map(|q| q.one_indexed());
    let doc = StepDoc {
        kind: match step.kind {
            StepKind::Cycle => "cycle",
            StepKind::EvenPath => "even-path",
            StepKind::OddPaths => "odd-paths-batch",
        }
        .into(),
        n_before: step.n_before,
        n_after: step.n_after,
        interchanged: step.interchanged,
        left2: perm(&step.left2),
        right1: perm(&step.right1),
        right2: perm(&step.right2),
        deleted: step.deleted.iter().map(|&(x, y)| [x + 1, y + 1]).collect(),
        x_map: step.x_map.iter().map(|v| v.map(|i| i + 1)).collect(),
        y_map: step.y_map.iter().map(|v| v.map(|i| i + 1)).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serializable document")
}

pub fn step_from_json(text: &str) -> Result<SurgeryStep> {
    let doc: StepDoc = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("malformed step JSON: {e}")))?;
    let kind = match doc.kind.as_str() {
        "cycle" => StepKind::Cycle,
        "even-path" => StepKind::EvenPath,
        "odd-paths-batch" => StepKind::OddPaths,
        other => {
            return Err(Error::InvalidInput(format!("unknown step kind {other:?}")))
        }
    };
    let perm = |p: &Option<Vec<usize>>| -> Result<Option<Permutation>> {
        p.as_ref()
            .map(|row| Permutation::from_one_indexed(row))
            .transpose()
    };
    let unmap = |m: &[Option<usize>], side: &str| -> Result<Vec<Option<usize>>> {
        m.iter()
            .map(|v| match v {
                Some(0) => Err(Error::InvalidInput(format!(
                    "{side} relabelling entries are 1-indexed"
                ))),
                Some(i) => Ok(Some(i - 1)),
                None => Ok(None),
            })
            .collect()
    };
    for &[x, y] in &doc.deleted {
        if x == 0 || y == 0 {
            return Err(Error::InvalidInput("deleted pairs are 1-indexed".into()));
        }
    }
    Ok(SurgeryStep {
        kind,
        n_before: doc.n_before,
        n_after: doc.n_after,
        interchanged: doc.interchanged,
        left2: perm(&doc.left2)?,
        right1: perm(&doc.right1)?,
        right2: perm(&doc.right2)?,
        deleted: doc.deleted.iter().map(|&[x, y]| (x - 1, y - 1)).collect(),
        x_map: unmap(&doc.x_map, "domain")?,
        y_map: unmap(&doc.y_map, "range")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surgery::{classify_edges, eliminate_cycle, quadruple_of};
    use num::One;

    fn pb(pairs: &[(usize, usize)]) -> PartialBijection {
        PartialBijection::from_one_indexed(pairs).unwrap()
    }

    #[test]
    fn rational_strings_round_trip() {
        for (n, d) in [(1i64, 3i64), (-7, 2), (0, 1), (22, 7)] {
            let x = BigRational::new(BigInt::from(n), BigInt::from(d));
            assert_eq!(rational_from_string(&rational_to_string(&x)).unwrap(), x);
        }
        assert!(rational_from_string("1/0").is_err());
        assert!(rational_from_string("5").is_err());
    }

    #[test]
    fn family_json_round_trips_byte_identically() {
        let class = RestrictionClass::new(
            5,
            vec![pb(&[(1, 2)])],
            vec![pb(&[(2, 1)]), pb(&[(3, 3)])],
        )
        .unwrap();
        let fam = PermFamily::full(class).unwrap();
        let text = family_to_json(&fam);
        let back = family_from_json(&text).unwrap();
        assert_eq!(back, fam);
        assert_eq!(family_to_json(&back), text);
    }

    #[test]
    fn family_json_rejects_bad_rows() {
        let class = RestrictionClass::full(3);
        let fam = PermFamily::full(class).unwrap();
        let mut text = family_to_json(&fam);
        text = text.replace("\"n\": 3", "\"n\": 4");
        assert!(family_from_json(&text).is_err());
        assert!(family_from_json("{").is_err());
    }

    #[test]
    fn spectrum_csv_top_row_is_trivial_eigenvalue() {
        let csv = spectrum_csv(4, 0).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "partition,dimension,lambda_num,lambda_den,lambda_float");
        assert!(lines.iter().any(|l| l.starts_with("4,1,1,1,")));
    }

    #[test]
    fn threshold_strings_parse() {
        assert_eq!(
            threshold_from_string("3/2").unwrap(),
            Threshold::Rational(BigRational::new(BigInt::from(3), BigInt::from(2)))
        );
        assert_eq!(
            threshold_from_string("2").unwrap(),
            Threshold::Rational(BigRational::from_integer(BigInt::from(2)))
        );
        assert_eq!(threshold_from_string("sqrt(6)").unwrap(), Threshold::sqrt(6));
        assert_eq!(
            threshold_from_string("1/2*sqrt(5)").unwrap(),
            Threshold::sqrt_times(BigRational::new(BigInt::from(1), BigInt::from(2)), 5)
        );
        assert!(threshold_from_string("two").is_err());
    }

    #[test]
    fn surgery_step_round_trips_and_replays() {
        let f1 = PermFamily::full(
            RestrictionClass::new(6, vec![pb(&[(1, 1), (2, 2)])], vec![]).unwrap(),
        )
        .unwrap();
        let f2 = PermFamily::full(
            RestrictionClass::new(6, vec![pb(&[(2, 1), (1, 2)])], vec![]).unwrap(),
        )
        .unwrap();
        let q = quadruple_of(&f1, &f2).unwrap();
        let cycle = classify_edges(&q).unwrap().cycles[0].clone();
        let eta = BigRational::new(BigInt::from(1), BigInt::from(2));
        let out = eliminate_cycle(&f1, &f2, 1, 2, &eta, &cycle).unwrap();

        let text = step_to_json(&out.step);
        let back = step_from_json(&text).unwrap();
        assert_eq!(step_to_json(&back), text);
        let s1 = Permutation::identity(4);
        let s2 = Permutation::from_one_indexed(&[2, 3, 4, 1]).unwrap();
        assert_eq!(
            back.lift_pair(&s1, &s2).unwrap(),
            out.step.lift_pair(&s1, &s2).unwrap()
        );
    }

    #[test]
    fn report_json_contains_exact_fields() {
        let rep = PseudorandomnessReport {
            kind: ReportKind::Quasiregular,
            size_parameter: 2,
            threshold: Threshold::Rational(BigRational::one()),
            verdict: false,
            witness: Some(pb(&[(1, 2)])),
            attained: BigRational::new(BigInt::from(7), BigInt::from(5)),
        };
        let text = report_to_json(&rep);
        assert!(text.contains("\"attained\": \"7/5\""));
        assert!(text.contains("\"kind\": \"quasiregular\""));
    }
}
