# # How fast do the iterations reach a contraction's fixed point?
#
# For T = Scale(sigma, z) every scheme contracts toward z at a fixed rate.
# Picard uses sigma, Mann uses 1 - a + a sigma, and Khan's two-step update
# gives (1 - a + a sigma) sigma, which is never slower than Mann.

from fixvi import gen_contraction_speed, speed_comparison

print(f"{'sigma':>6s}{'picard':>8s}{'mann':>6s}{'khan':>6s}{'hybrid':>8s}{'khan factor':>13s}")
for seed in range(8):
    T, z = gen_contraction_speed(seed)
    out = speed_comparison(T, z, alpha=0.5)
    print(f"{T.factor:6.3f}{out['picard']:8d}{out['mann']:6d}{out['khan']:6d}{out['karahan12']:8d}"
          f"{out['khan_factor']:13.6f}")

# ## Reading the table
#
# Khan beats Mann on every row, with the factor matching the closed form. For a
# scaling its factor is also below sigma, so it beats Picard as well. For a
# general nonexpansive map the comparison with Picard can go either way.
