"""Fixture definitions shared by the golden-value freezer and the tests."""

from cohlen import synth

STRIPES = synth.TextureSpec("stripes", 128, period=8, levels=(0, 255), orientation="vertical")
STRIPES_FRACTION = 0.5

ISOTROPIC_NOISE = synth.TextureSpec("noise", 128, seed=11, noise_std=40.0)
ISOTROPY_FRACTION = 0.5
ISOTROPY_BOUND = 1.25

DISK_BACKGROUND = synth.TextureSpec("noise", 128, seed=5, noise_std=40.0)
DISK_CENTER = (64, 64)
DISK_RADIUS = 12
DISK_OFFSETS = (-40, -80, -120)
DISK_FRACTION = 0.5
DISK_RMAX = 16

CLI_STRIPES = synth.TextureSpec("stripes", 64, period=8, levels=(0, 255), orientation="vertical")

ORACLE_SEEDS = tuple(range(100, 110))


def disk_image(offset):
    return synth.inject_disk(synth.generate(DISK_BACKGROUND), DISK_CENTER, DISK_RADIUS, offset)
