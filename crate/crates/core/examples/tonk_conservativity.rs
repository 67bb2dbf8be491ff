//! IPL is consistent up to a bound; adding tonk proves q from p.

use pts::corpus;
use pts::prover::{check_conservativity, check_consistency, Sequent};

fn main() -> pts::Result<()> {
    let ipl = corpus::load("ipl")?;
    let report = check_consistency(&ipl, 6);
    println!("ipl consistent to depth 6: {}", report.consistent());

    let tonk = corpus::load("ipl-tonk")?;
    let probes = vec![
        Sequent::parse("p |- q", &ipl)?,
        Sequent::parse("(p & q) |- (q | r)", &ipl)?,
    ];
    let cons = check_conservativity(&ipl, &tonk, &probes, 3)?;
    println!("conservative: {}", cons.conservative());
    for w in &cons.witnesses {
        println!("{}\n  {}", w.sequent, w.proof);
    }
    Ok(())
}
