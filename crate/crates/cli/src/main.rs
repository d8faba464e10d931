fn main() {
    println!("anosovlab {}", env!("CARGO_PKG_VERSION"));
}
