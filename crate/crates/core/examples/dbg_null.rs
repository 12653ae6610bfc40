use solhp_core::deformation::{build_system, dim_h1};
use solhp_core::presentation::genus2_fixture;

fn main() {
    let input = genus2_fixture();
    let system = build_system(&input);
    println!("equations: {}", system.num_equations());
    println!("unknowns:  {}", system.layout.total());
    println!("nullity:   {}", system.nullity());
    if system.nullity() >= 3 {
        println!("dim H1:    {}", dim_h1(&system));
    }
}
