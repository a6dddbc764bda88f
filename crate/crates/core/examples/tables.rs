//! Prints every futures table as CSV.

use qmu::examples::futures_tables;
use qmu::EvalConfig;

fn main() {
    for table in futures_tables(&EvalConfig::default(), &[]).unwrap() {
        print!("{}", table.to_csv());
    }
}
