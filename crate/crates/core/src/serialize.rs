//! JSON/CSV emission helpers.  Integers travel as decimal strings (heights
//! exceed 64 bits from depth 2 on) and rationals as "num/den".

use crate::arith::*;
use crate::best_approx::BestApproxSequence;
use crate::cantor_tree::Tree;
use crate::interval::QInterval;
use serde_json::{json, Map, Value};

pub fn int_json(n: &Int) -> Value {
    Value::String(n.to_string())
}

pub fn rat_json(x: &Rat) -> Value {
    Value::String(rat_to_string(x))
}

pub fn interval_json(iv: &QInterval) -> Value {
    json!({ "lo": rat_to_string(&iv.lo), "hi": rat_to_string(&iv.hi) })
}

/// Sequence export: list of {q, p1, p2, rn_sq} plus the terminal flag.
pub fn sequence_json(seq: &BestApproxSequence) -> Value {
    let records: Vec<Value> = seq
        .records
        .iter()
        .map(|r| {
            let mut m = Map::new();
            m.insert("q".into(), int_json(&r.x.q));
            m.insert("p1".into(), int_json(&r.x.p1));
            m.insert("p2".into(), int_json(&r.x.p2));
            if r.dist2.is_point() {
                m.insert("rn_sq".into(), rat_json(&r.dist2.lo));
            } else {
                m.insert("rn_sq_lo".into(), rat_json(&r.dist2.lo));
                m.insert("rn_sq_hi".into(), rat_json(&r.dist2.hi));
            }
            Value::Object(m)
        })
        .collect();
    json!({
        "theta": {
            "center": [rat_to_string(&seq.theta.center.x), rat_to_string(&seq.theta.center.y)],
            "radius": rat_to_string(&seq.theta.radius),
        },
        "qmax": seq.qmax.to_string(),
        "terminal": seq.terminal,
        "records": records,
    })
}

/// Tree export: nodes with decimal-string integers, parent ids, witness data
/// and certified radius enclosures (the exact radius is c2 |x|^r0, stored as
/// its defining pair plus an interval).
pub fn tree_json(tree: &Tree) -> Value {
    let p = &tree.params;
    let nodes: Vec<Value> = tree
        .nodes
        .iter()
        .map(|n| {
            let radius = p.ball_radius(&n.x);
            let enc = radius.enclosure(96);
            let mut m = Map::new();
            m.insert("id".into(), json!(n.id));
            m.insert("parent".into(), match n.parent {
                Some(pid) => json!(pid),
                None => Value::Null,
            });
            m.insert("depth".into(), json!(n.depth));
            m.insert("bootstrap".into(), json!(n.bootstrap));
            m.insert(
                "x".into(),
                json!([n.x.p1.to_string(), n.x.p2.to_string(), n.x.q.to_string()]),
            );
            m.insert("lam1_sq".into(), rat_json(&n.lat.lam1_sq));
            m.insert("lam2_sq".into(), rat_json(&n.lat.lam2_sq));
            m.insert("radius".into(), interval_json(&enc));
            if let Some(w) = &n.witness {
                m.insert(
                    "witness".into(),
                    json!({
                        "y": [w.y.p1.to_string(), w.y.p2.to_string(), w.y.q.to_string()],
                        "m": w.m.to_string(),
                        "alpha_sq": rat_to_string(&w.alpha_sq),
                        "y_lam1_sq": rat_to_string(&w.y_lam1_sq),
                        "y_lam2_sq": rat_to_string(&w.y_lam2_sq),
                        "a": w.a.to_string(),
                        "k": w.k.to_string(),
                    }),
                );
            }
            m.insert("children".into(), json!(n.children));
            Value::Object(m)
        })
        .collect();
    json!({
        "params": {
            "mu": rat_to_string(&p.mu),
            "b": rat_to_string(&p.b),
            "c1": rat_to_string(&p.c1),
            "c2": rat_to_string(&p.c2),
            "c3": rat_to_string(&p.c3),
            "c4": rat_to_string(&p.c4),
            "min_height": p.min_height.to_string(),
            "witness_cap": p.witness_cap,
            "child_cap": p.child_cap,
        },
        "root": tree.root,
        "nodes": nodes,
    })
}

/// CSV row assembly with no quoting needs (all numeric/token fields).
pub fn csv_line(fields: &[String]) -> String {
    fields.join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::best_approx::{best_sequence, TargetPoint};

    #[test]
    fn sequence_roundtrip_fields() {
        let t = TargetPoint::exact(rat(5, 8), rat(0, 1));
        let seq = best_sequence(&t, &Int::from(10)).unwrap();
        let v = sequence_json(&seq);
        assert_eq!(v["terminal"], serde_json::json!(true));
        assert_eq!(v["records"][3]["q"], serde_json::json!("8"));
        assert_eq!(v["records"][2]["rn_sq"], serde_json::json!("1/64"));
    }
}
