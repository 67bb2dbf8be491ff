//! Side conditions in S4: a necessitation is valid only over boxed assumptions.

use pts::corpus;
use pts::deduction::{check_proof, Deduction};

fn main() -> pts::Result<()> {
    let s4 = corpus::load("s4")?;
    let good = Deduction::parse("(apply boxI (apply boxE (assume [][]p) => []p) => [][]p)", &s4)?;
    let bad = Deduction::parse("(apply boxI (assume p) => []p)", &s4)?;
    for d in [good, bad] {
        let report = check_proof(&s4, &d);
        println!("{d}\n  valid {}", report.valid);
        for v in &report.violations {
            println!("  {v}");
        }
    }

    // the frame form carries its assumptions as extra premises
    let frame = corpus::load("s4-frame")?;
    let d = Deduction::parse(
        "(apply boxI discharge 1 (assume []q) (apply boxE (hyp 1 []q) => q) => []q)",
        &frame,
    )?;
    println!("{}", d.render_pretty());
    println!("  valid {}", check_proof(&frame, &d).valid);
    Ok(())
}
