//! The 24 single-qubit Cliffords with their pulse decompositions, with and
//! without free virtual Z rotations.
//!
//! ```bash
//! cargo run --release --example clifford_table
//! ```

use subharm::benchmarking::{clifford_group, DecompositionTable, Gate};

fn show(g: &[Gate]) -> String {
    if g.is_empty() {
        return "I".into();
    }
    g.iter()
        .map(|x| match x {
            Gate::VirtualZ(t) => format!("Z({:+.0})", t.to_degrees()),
            other => format!("{other:?}"),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() {
    let std = clifford_group(DecompositionTable::Standard);
    let vz = clifford_group(DecompositionTable::VirtualZ);
    println!("{:>3}  {:<24} with virtual Z", "#", "x/y pulses");
    for (a, b) in std.elements.iter().zip(&vz.elements) {
        println!("{:>3}  {:<24} {}", a.index, show(&a.decomposition), show(&b.decomposition));
    }
    println!("pulses per Clifford: {:.3} / {:.3}", std.average_pulses(), vz.average_pulses());
}
