//! Connectives with the same introduction form but different defining rules.

use pts::corpus;
use pts::harmony::harmony_verdict;
use pts::prover::check_interderivable;

fn main() -> pts::Result<()> {
    for (calc, a, b, f, g) in [
        ("ipl-times", "&", "x", "(p & q)", "(p x q)"),
        ("ipl-T-t", "T", "t", "T p", "t p"),
    ] {
        let c = corpus::load(calc)?;
        for conn in [a, b] {
            let v = harmony_verdict(&c, conn)?;
            let by = v.defining.as_ref().map(|d| d.rule.as_str()).unwrap_or("-");
            println!("{conn}: {} via {by}", v.status);
        }
        let (there, back) = check_interderivable(&c, &c.parse_formula(f)?, &c.parse_formula(g)?, 4);
        for r in [there, back] {
            println!(
                "  {}",
                r.proof
                    .map(|d| d.to_string())
                    .unwrap_or_else(|| "not found".into())
            );
        }
    }
    Ok(())
}
