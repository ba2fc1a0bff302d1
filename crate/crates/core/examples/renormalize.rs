//! Unit renormalization: `ξv` has sup norm within `C^{±1}` of `H(v)^{1/d}`.

use badk::latticeflow::{unit_renormalize, GroupElement, ModuleVector};
use badk::numberfield::NumberField;

fn main() -> badk::Result<()> {
    let k = NumberField::cyclic_cubic();
    let id = GroupElement::identity(3, 128);
    let c = k.renormalization_constant();
    for a in [[7, 3, -2], [1, 1, 0], [40, -12, 5]] {
        let v = ModuleVector::new(&k, k.element(&a)?, k.one(), &id);
        let (unit, w) = unit_renormalize(&k, &v, &id)?;
        let h = v.height().to_f64().powf(1.0 / 3.0);
        println!(
            "a = {}: H^(1/3) = {h:.5}  |v| = {:.5}  unit {unit}  |uv| = {:.5}  (C = {c:.4})",
            v.a(),
            v.sup_norm().to_f64(),
            w.sup_norm().to_f64()
        );
    }
    Ok(())
}
