"""Group images under the basis image that drives them.

An image joins the cluster of basis b when p(image|b) exceeds the image's
own marginal: the basis raises its probability. On Swimmer each basis is
(close to) a limb position, so its cluster collects exactly the images
showing that limb position.

    python3 demos/06_clusters.py
"""

from pathlib import Path

from pccnmf import (SolverOptions, derive_pcc, export_cluster_montage, factorize,
                    generate_swimmer, natural_clusters)


def show(column, side=13):
    peak = column.max()
    for row in column.reshape(side, side):
        print("   " + "".join("#" if v > 0.5 * peak else "." for v in row))


def main():
    swimmer = generate_swimmer()
    f = factorize(swimmer, 14, seed=0, opts=SolverOptions(max_iters=600, rel_tol=1e-8))
    pcc = derive_pcc(swimmer, f)

    report = natural_clusters(pcc, k=5, require_positive=True)
    top = report.clusters[0]
    print(f"cluster of the highest-prior basis (prior={top.prior:.4f}):")
    show(f.basis[:, top.basis])
    print("members (image, p(image|basis), p(image)):")
    for member in top.members:
        print(f"  image {member.image:3d}   {member.p_image_given_basis:.5f}   "
              f"{member.p_image:.5f}")
    print("\nfirst member image:")
    show(swimmer.values[:, top.members[0].image])

    out = Path("cluster_montage")
    export_cluster_montage(report, swimmer, f, out)
    print(f"\nwrote {len(list(out.glob('*.pgm')))} PGM strips + index.json to {out}/")


if __name__ == "__main__":
    main()
