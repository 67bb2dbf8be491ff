//! Levelling a ridge: the projection is pushed into both cases of the
//! disjunction, where it meets the conjunction introductions as peaks.

use pts::corpus;
use pts::deduction::Deduction;
use pts::normalize::normalize;

fn main() -> pts::Result<()> {
    let ipl = corpus::load("ipl")?;
    let d = Deduction::parse(
        "(apply andE1 (apply orE discharge 1 (assume (p | q)) \
           (apply andI (hyp 1 p) (hyp 1 p) => (p & p)) \
           (apply andI (apply botE (assume #f) => p) (apply botE (assume #f) => p) => (p & p)) => (p & p)) => p)",
        &ipl,
    )?;
    let (n, trace) = normalize(&ipl, &d, 100)?;
    for step in &trace.steps {
        println!("{step}");
    }
    println!("{}", n.render_pretty());
    Ok(())
}
