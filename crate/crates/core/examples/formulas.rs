//! Parsing formulas over a signature with a user-declared connective.

use pts::formula::{Fixity, Formula, Signature};

fn main() -> pts::Result<()> {
    let sig = Signature::builtin().with("tonk", Fixity::Infix)?;
    for text in ["((p tonk q) -> []<>r)", "~(p & #f)", "[](<>p | []#t)"] {
        let f = Formula::parse(text, &sig)?;
        println!(
            "{f}\n  size {}  connectives {:?}  modalised {}",
            f.size(),
            f.connectives(),
            f.is_modalised()
        );
    }
    // binary compounds must be parenthesized
    println!("{}", Formula::parse("p & q", &sig).unwrap_err());
    Ok(())
}
