//! Exact-match phrase F1 between two CoNLL annotations.

use linkner::conll;
use linkner::eval::exact_f1;

const GOLD: &str = "\
-DOCSTART- O

EU\tB-ORG
rejects\tO
German\tB-MISC
call\tO
to\tO
boycott\tO
British\tB-MISC
lamb\tO
.\tO

Peter\tB-PER
Blackburn\tI-PER
visited\tO
New\tB-LOC
York\tI-LOC
";

// IOB1 input is accepted too
const PRED: &str = "\
EU\tI-ORG
rejects\tO
German\tO
call\tO
to\tO
boycott\tO
British\tO
lamb\tO
.\tO

Peter\tI-PER
Blackburn\tI-PER
visited\tO
New\tI-ORG
York\tI-ORG
";

fn main() -> linkner::Result<()> {
    let gold = conll::spans(&conll::parse(GOLD, "gold")?);
    let pred = conll::spans(&conll::parse(PRED, "pred")?);
    let gold: Vec<_> = gold.into_iter().flatten().collect();
    let pred: Vec<_> = pred.into_iter().flatten().collect();
    print!("{}", exact_f1(&gold, &pred).to_table());
    Ok(())
}
