use enaqt_core::analytic3::*;
fn main() {
    for &g2 in &[0.1, 0.3, 1.0] {
        for &g3 in &[0.1, 0.3, 1.0] {
            let p = ThreeSiteParams { j1: 1e-3, j: 1e-3, delta: 0.3, gamma2: g2, gamma3: g3 };
            let nn = compare_to_numeric(&p, ThreeSiteMode::NearestNeighbor, 1e-4).unwrap();
            let lr = compare_to_numeric(&p, ThreeSiteMode::LongRange, 1e-4).unwrap();
            println!("G2={g2} G3={g3}: NN {:.3}%  LR {:.3}%", 100.0*nn, 100.0*lr);
        }
    }
}
