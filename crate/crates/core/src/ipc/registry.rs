use crate::error::{Error, Result};
use crate::mrdi::Value;
use crate::workloads;

pub type RemoteFn = fn(&[Value]) -> Result<Value>;

/// Named pure functions callable on workers. Coordinator and workers run the
/// same executable, so both sides build the same table.
#[derive(Clone)]
pub struct FunctionRegistry {
    entries: Vec<(&'static str, RemoteFn)>,
}

impl FunctionRegistry {
    pub fn empty() -> Self {
        FunctionRegistry { entries: Vec::new() }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("identity", identity);
        r.register("poly_square", poly_square);
        r.register("poly_mul", poly_mul);
        r.register("det_mod_p", workloads::det_mod_p_task);
        r.register("kernel_block", workloads::kernel_block_task);
        r
    }

    /// Later registrations under an existing name replace it.
    pub fn register(&mut self, name: &'static str, f: RemoteFn) {
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = f,
            None => self.entries.push((name, f)),
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }

    pub fn get(&self, name: &str) -> Option<RemoteFn> {
        self.entries.iter().find(|(n, _)| *n == name).map(|(_, f)| *f)
    }

    pub fn call(&self, name: &str, args: &[Value]) -> Result<Value> {
        let f = self
            .get(name)
            .ok_or_else(|| Error::Validation(format!("unknown function `{name}`")))?;
        f(args)
    }
}

pub(crate) fn arity(name: &str, args: &[Value], n: usize) -> Result<()> {
    if args.len() != n {
        return Err(Error::Validation(format!("{name} expects {n} arguments, got {}", args.len())));
    }
    Ok(())
}

fn identity(args: &[Value]) -> Result<Value> {
    Ok(match args {
        [v] => v.clone(),
        _ => Value::Tuple(args.to_vec()),
    })
}

fn poly_arg<'a>(name: &str, v: &'a Value) -> Result<&'a crate::algebra::Polynomial> {
    v.as_polynomial()
        .ok_or_else(|| Error::Validation(format!("{name} expects a polynomial, got a {}", v.kind())))
}

fn poly_square(args: &[Value]) -> Result<Value> {
    arity("poly_square", args, 1)?;
    let p = poly_arg("poly_square", &args[0])?;
    Ok(Value::Polynomial(p.mul(p)?))
}

fn poly_mul(args: &[Value]) -> Result<Value> {
    arity("poly_mul", args, 2)?;
    let a = poly_arg("poly_mul", &args[0])?;
    let b = poly_arg("poly_mul", &args[1])?;
    Ok(Value::Polynomial(a.mul(b)?))
}
