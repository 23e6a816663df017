/// Entanglement generation efficiency η* = 2P / (t (1/T1 + 1/T2)).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Efficiency {
    Finite(f64),
    /// Both coherence times infinite.
    Unbounded,
}

pub fn ege(p_succ: f64, t: f64, t1: f64, t2: f64) -> crate::error::Result<Efficiency> {
    if !(t > 0.0 && t1 > 0.0 && t2 > 0.0) {
        return Err(crate::error::Error::Parameter { name: "ege", reason: "times must be positive".into() });
    }
    let rate = 1.0 / t1 + 1.0 / t2;
    if rate == 0.0 {
        return Ok(if p_succ == 0.0 { Efficiency::Finite(0.0) } else { Efficiency::Unbounded });
    }
    Ok(Efficiency::Finite(2.0 * p_succ / (t * rate)))
}
