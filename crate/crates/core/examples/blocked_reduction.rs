//! An implication peak that cannot be reduced under the S4 side condition,
//! and the same deduction in the frame calculus.

use pts::corpus;
use pts::deduction::Deduction;
use pts::normalize::normalize;

fn main() -> pts::Result<()> {
    let s4 = corpus::load("s4")?;
    let d = Deduction::parse(
        "(apply impE (apply impI discharge 1 (apply boxI (hyp 1 []p) => [][]p) => ([]p -> [][]p)) \
         (apply andE1 (assume ([]p & q)) => []p) => [][]p)",
        &s4,
    )?;
    let (_, trace) = normalize(&s4, &d, 100)?;
    for b in &trace.blocked {
        println!("blocked {} at {}: {}", b.redex.kind, b.redex.site, b.reason);
    }

    let frame = corpus::load("s4-frame")?;
    let d = Deduction::parse(
        "(apply impE (apply impI discharge 1 (apply boxI discharge 2 (hyp 1 []p) (hyp 2 []p) => [][]p) \
         => ([]p -> [][]p)) (apply andE1 (assume ([]p & q)) => []p) => [][]p)",
        &frame,
    )?;
    let (n, trace) = normalize(&frame, &d, 100)?;
    println!("frame: {} step(s)\n{}", trace.steps.len(), n.render_pretty());
    Ok(())
}
