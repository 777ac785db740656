use nlslab_core::normalize::normalize;
use nlslab_core::templates::StandardForm;

fn main() {
    let form = StandardForm::A11 {
        lambda1: 3.0,
        lambda2: 0.5,
        eta1: 1.0,
        eta2: 2.0,
        eta3: 1.0,
    };
    let s = form.build().unwrap();
    let r = normalize(&s).unwrap();
    println!("tag {:?}", r.form.tag());
    for (k, v) in r.form.params() {
        println!("  {k} = {v}");
    }
}
