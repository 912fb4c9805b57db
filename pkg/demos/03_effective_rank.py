"""Estimate the effective rank via predictability bracketing.

A pair (pixel, image) is "explained" when its conditional p(pixel|image)
lies between the smallest and largest component conditionals p(pixel|b).
The scan factorizes at each rank over several seeds and reports the first
rank whose median invalid-pair fraction drops below a tolerance; information
criteria are recorded on the same grid for comparison.

    python3 demos/03_effective_rank.py        (a few minutes)
"""

from pccnmf import apply_flip_noise, bic_from_error, estimate_rc, generate_swimmer


def main():
    swimmer = generate_swimmer()
    n_pairs = swimmer.n_pixels * swimmer.n_images

    report = estimate_rc(swimmer, tau=1.0 / n_pairs, r_min=8, r_max=20,
                         seeds=range(5))
    print("clean Swimmer, tau = one invalid pair in the dataset:")
    for rank, invalid in zip(report.ranks, report.median_invalid):
        bar = "#" * int(60 * (1 - invalid) ** 40)
        print(f"  R={rank:2d} median invalid pairs {invalid * n_pairs:7.1f}  {bar}")
    print(f"estimated effective rank: {report.r_c} (exact rank is 17 by construction)")

    print("\ninformation criteria on the same scan (best error per rank):")
    for rank in report.ranks:
        err = report.best_error(rank)
        scores = [bic_from_error(err, swimmer.n_pixels, swimmer.n_images, rank, v)
                  for v in ("bic1", "bic2", "bic3")]
        print(f"  R={rank:2d}  " + "  ".join(f"{s:12.0f}" for s in scores))

    noisy = apply_flip_noise(swimmer, xi=0.25, seed=0)
    noisy_report = estimate_rc(noisy, tau=1e-3, r_min=20, r_max=32, seeds=range(3))
    print(f"\nnoisy Swimmer (xi=0.25), tau=1e-3: rank estimate {noisy_report.r_c} "
          f"(grows with noise, as it should)")


if __name__ == "__main__":
    main()
