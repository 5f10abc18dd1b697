//! Prints the compiled stress tape of the neo-Hookean kernel and the size of
//! both tapes for each built-in material.

use hyperfem::materials::MaterialConfig;

fn main() {
    let names = ["stvk", "neo-hookean", "mooney-rivlin", "ho"];
    println!("{:<16} {:>12} {:>12}", "material", "P instrs", "P+A instrs");
    for name in names {
        let k = MaterialConfig::builtin(name).build().unwrap().kernel().unwrap();
        println!("{:<16} {:>12} {:>12}", k.name(), k.stress_tape().instructions().len(), k.full_tape().instructions().len());
    }
    let nh = MaterialConfig::builtin("neo-hookean").build().unwrap().kernel().unwrap();
    println!("\nneo-Hookean stress tape (out_0 = psi, out_1..9 = P row-major):\n");
    print!("{}", nh.stress_tape().dump());
}
