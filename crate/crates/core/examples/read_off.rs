//! Reading off elimination rules from an introduction rule and back.

use pts::corpus;
use pts::schema::{derive_elims_from_intro, derive_intros_from_elim};

fn main() -> pts::Result<()> {
    let ipl = corpus::load("ipl")?;
    for name in ["andI", "impI"] {
        let r = ipl.rule(name).unwrap();
        println!("from {name}:");
        for e in derive_elims_from_intro(r)? {
            println!("{}", e.render());
        }
    }

    let times = corpus::load("ipl-times")?;
    println!("from timesE:");
    for i in derive_intros_from_elim(times.rule("timesE").unwrap())? {
        println!("{}", i.render());
    }
    Ok(())
}
