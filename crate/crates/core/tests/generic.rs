use num_rational::Rational64;
use twolocal::forms::{res_total, Form2};
use twolocal::series::{Iterated, Series};
use twolocal::symbols::{kato_pairing, tame_1d};
use twolocal::FieldElement;

type It = Iterated<Rational64>;

fn c(n: i64) -> FieldElement<Rational64> {
    FieldElement::int(n)
}

#[test]
fn machine_rationals_give_the_same_answers() {
    let (u, t) = (It::inner_var(), It::outer_var());
    // 1/(u t) du∧dt has total residue 1
    let g = u.mul_ref(&t).inv(&[8, 8]).unwrap();
    assert_eq!(res_total(&Form2::new(g)).unwrap(), c(1));

    let a = Series::<Rational64>::from_ints(1, &[2, 1], None);
    let b = Series::<Rational64>::from_ints(-1, &[3], None);
    // (−1)^{v(a)v(b)} a₀^{v(b)} b₀^{−v(a)} with v(a) = 1, v(b) = −1
    assert_eq!(tame_1d(&a, &b, &[8, 8]).unwrap(), FieldElement::scalar(Rational64::new(-1, 6)));

    let k = kato_pairing(&u, &t, &[8, 8]).unwrap();
    assert!(k.agrees_with(&Series::monomial(c(1), 1)), "{k}");
}
