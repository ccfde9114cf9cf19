"""Kernel and image dimensions of [Y, .] per degree for a diagonal linear field Y."""
import argparse

from pullback_poisson.poincare import EigenData, nonresonant_up_to_order, resonant_monomials, spectral_dimensions


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lambda", dest="lam", default="2,5,11")
    ap.add_argument("--deg", type=int, default=4, help="highest coefficient degree")
    ap.add_argument("--grades", type=int, nargs="+", default=[1, 2])
    args = ap.parse_args()

    lam = EigenData.of(args.lam)
    cert = nonresonant_up_to_order(lam, args.deg + 2)
    status = f"relation {cert.witness}" if cert.resonant else "none found"
    print(f"lambda = {args.lam}; integer relations up to order {args.deg + 2}: {status}")
    for grade in args.grades:
        print(f"\ngrade {grade}")
        print(f"{'degree':>6} {'total':>6} {'kernel':>7} {'image':>6}  direct sum")
        for row in spectral_dimensions(lam, grade, args.deg):
            print(f"{row['degree']:>6} {row['total']:>6} {row['kernel']:>7} {row['image']:>6}  {row['direct_sum']}")
        for dirs, e in resonant_monomials(lam, grade, args.deg):
            frame = "^".join(f"d{i + 1}" for i in dirs)
            print(f"  off-diagonal kernel element: y^{e} {frame}")


if __name__ == "__main__":
    main()
