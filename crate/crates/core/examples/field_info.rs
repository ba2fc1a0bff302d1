//! Places, units and the product formula for a few fields.

use badk::numberfield::{AlgebraicInteger, NumberField};
use badk::ball::RBall;

fn main() -> badk::Result<()> {
    let prec = 128;
    let fields = [
        NumberField::q_sqrt2(),
        NumberField::gaussian(),
        NumberField::cyclic_cubic(),
        NumberField::new("Q(2^(1/3))", &[-2, 0, 0], Some(vec![AlgebraicInteger::from_i64s(&[-1, 1, 0])]))?,
    ];
    for k in &fields {
        println!("{}  minpoly {:?}  disc {}", k.label(), k.minpoly().full(), k.minpoly().discriminant());
        for p in k.places() {
            let (re, im) = p.root_f64();
            println!("  place {} {:?} e={} root {re:.12} {im:+.12}i", p.index(), p.kind(), p.exponent());
        }
        for u in k.units() {
            let n = k.norm_from_places(u, prec);
            println!("  unit {u}  N = {}  |prod - 1| = {:.2e}", k.norm(u), n.sub(&RBall::one(prec)).mag());
        }
        let xi = AlgebraicInteger::generator(k);
        println!("  C = {:.6}  V M V^-1 residual {:.2e}", k.renormalization_constant(), k.diagonalization_residual(&xi, prec)?);
    }
    Ok(())
}
