//! Harmony verdicts for every shipped calculus.

use pts::corpus::ENTRIES;
use pts::harmony::all_verdicts;
use pts::schema::Calculus;

fn main() -> pts::Result<()> {
    for e in ENTRIES {
        let c = Calculus::parse(e.text)?;
        let row: Vec<String> = all_verdicts(&c)
            .iter()
            .map(|v| format!("{} {}", v.connective, v.status))
            .collect();
        println!("{:10} {}", e.name, row.join(", "));
    }
    Ok(())
}
