// The tape behind the model: build `sum(softmax(W x) * y)`, backpropagate,
// and compare one entry with a central difference.
//
// ```bash
// cargo run -p lcr-rot --example autodiff
// ```

use lcr_rot::math::{Graph, Tensor};

fn value(w: &Tensor, x: &Tensor, y: &Tensor) -> lcr_rot::Result<f64> {
    let mut g = Graph::new();
    let (w, x, y) = (g.constant(w.clone()), g.constant(x.clone()), g.constant(y.clone()));
    let z = g.matmul(w, x)?;
    let p = g.softmax(z)?;
    let py = g.mul(p, y)?;
    let s = g.sum(py);
    Ok(g.value(s).item())
}

pub fn run() -> lcr_rot::Result<()> {
    let w0 = Tensor::matrix(3, 2, vec![0.5, -1.0, 0.25, 0.75, -0.3, 0.2])?;
    let x0 = Tensor::vector(vec![1.5, -0.5]);
    let y0 = Tensor::vector(vec![0.0, 1.0, 0.0]);

    let mut g = Graph::new();
    let w = g.trainable(w0.clone());
    let x = g.constant(x0.clone());
    let y = g.constant(y0.clone());
    let z = g.matmul(w, x)?;
    let p = g.softmax(z)?;
    let py = g.mul(p, y)?;
    let s = g.sum(py);
    let grads = g.backward(s)?;
    let dw = grads.get(w).expect("trainable leaf");
    println!("f = {:.6}", g.value(s).item());
    println!("df/dW = {:.6?}", dw.data());

    let h = 1e-5;
    let mut plus = w0.clone();
    plus.data_mut()[1] += h;
    let mut minus = w0.clone();
    minus.data_mut()[1] -= h;
    let numeric = (value(&plus, &x0, &y0)? - value(&minus, &x0, &y0)?) / (2.0 * h);
    println!("dW[0,1]: analytic {:.9} numeric {:.9}", dw.data()[1], numeric);
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
