use std::collections::BTreeSet;

use crate::frontend::{arg_list_term, mul_term, prefix_term, Term};
use super::{LinearOutcome, LookupTables};

fn fact(pred: &str, args: Vec<Term>) -> String {
    format!("{}.", Term::fun(pred, args))
}

/// Renders the lookup tables as ground facts:
/// `look/2` relevant values, `order/4` successor links of values and bounds,
/// `look/3` multiplication entries, `look/4` addend pairs with their erg,
/// `upper/2` total upper bounds, and `index/3`, `lastindex/3`, `difall/1`.
pub fn dump_analysis(tables: &LookupTables) -> String {
    let mut lines: Vec<String> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut push = |line: String, lines: &mut Vec<String>| {
        if seen.insert(line.clone()) {
            lines.push(line);
        }
    };

    for (var, values) in &tables.relevant {
        for &e in values {
            push(fact("look", vec![Term::constant(var), Term::Int(e)]), &mut lines);
        }
        for w in values.windows(2) {
            push(
                fact(
                    "order",
                    vec![Term::constant("var"), Term::constant(var), Term::Int(w[0]), Term::Int(w[1])],
                ),
                &mut lines,
            );
        }
    }
    for ((var, coeff), entries) in &tables.mul_look {
        for e in entries {
            push(
                fact("look", vec![mul_term(*coeff, var), Term::Int(e.value), Term::Int(e.product)]),
                &mut lines,
            );
        }
    }
    for info in tables.linear.values() {
        let LinearOutcome::Prefixes(keys) = &info.outcome else {
            continue;
        };
        for (i, key) in keys.iter().enumerate() {
            let prefix = &tables.prefixes[key];
            let term = prefix_term(&info.sum, i + 1);
            push(fact("upper", vec![term.clone(), Term::Int(prefix.upp)]), &mut lines);
            for w in prefix.bounds.windows(2).rev() {
                push(
                    fact(
                        "order",
                        vec![Term::constant("sum"), term.clone(), Term::Int(w[1]), Term::Int(w[0])],
                    ),
                    &mut lines,
                );
            }
            if i == 0 {
                continue;
            }
            for p in &prefix.pairs {
                push(
                    fact(
                        "look",
                        vec![term.clone(), Term::Int(p.left), Term::Int(p.addend), Term::Int(p.erg)],
                    ),
                    &mut lines,
                );
            }
        }
    }
    for info in tables.alldiff.values() {
        let args = arg_list_term(&info.args);
        for (i, a) in info.args.iter().enumerate() {
            push(
                fact("index", vec![args.clone(), Term::constant(a), Term::Int(i as i64 + 1)]),
                &mut lines,
            );
        }
        for (&e, &i) in &info.lastindex {
            push(
                fact("lastindex", vec![args.clone(), Term::Int(e), Term::Int(i as i64)]),
                &mut lines,
            );
        }
        if info.difall {
            push(fact("difall", vec![args]), &mut lines);
        }
    }
    for info in tables.tables.values() {
        let args = arg_list_term(&info.args);
        for (i, a) in info.args.iter().enumerate() {
            push(
                fact("index", vec![args.clone(), Term::constant(a), Term::Int(i as i64 + 1)]),
                &mut lines,
            );
        }
    }
    let mut out = lines.join("\n");
    if !out.is_empty() {
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::relevant_values;
    use crate::frontend::parse_native;

    #[test]
    fn running_inequality_dump() {
        let inst = parse_native(
            "int x 1 3\nint y 1 3\nint z 1 3\nclause sum(4*x - 3*y + z) <= 0",
        )
        .unwrap();
        let out = dump_analysis(&relevant_values(&inst).unwrap());
        for line in [
            "look(x,2).",
            "order(var,x,2,1).",
            "look(op(mul,-3,y),3,-9).",
            "look(op(add,op(mul,4,x),op(mul,-3,y)),4,-6,-2).",
            "order(sum,op(add,op(mul,4,x),op(mul,-3,y)),-1,-2).",
            "upper(op(mul,4,x),12).",
        ] {
            assert!(out.lines().any(|l| l == line), "missing {line} in\n{out}");
        }
        assert!(!out.contains("look(x,3)."));
    }
}
