"""Generator and discriminator for paired edge-to-palm translation.

The generator is a U-Net encoder-decoder (skip connections at every
resolution) that maps a 1-channel condition to a 1-channel image; there is
no noise input anywhere in the graph, so inference is a pure function of
the condition. The discriminator is a PatchGAN scoring local patches of a
(condition, image) pair.
"""

import torch
import torch.nn as nn


def init_weights(module: nn.Module, std: float = 0.02) -> None:
    """Gaussian init, the convention for this family of models."""
    for m in module.modules():
        if isinstance(m, (nn.Conv2d, nn.ConvTranspose2d)):
            nn.init.normal_(m.weight, 0.0, std)
            if m.bias is not None:
                nn.init.zeros_(m.bias)
        elif isinstance(m, nn.BatchNorm2d):
            nn.init.normal_(m.weight, 1.0, std)
            nn.init.zeros_(m.bias)


class _SkipBlock(nn.Module):
    """One U-Net level: downsample, recurse, upsample, concat the skip."""

    def __init__(self, outer_ch, inner_ch, in_ch=None, submodule=None,
                 outermost=False, innermost=False, dropout=0.0):
        super().__init__()
        self.outermost = outermost
        in_ch = outer_ch if in_ch is None else in_ch

        downconv = nn.Conv2d(in_ch, inner_ch, 4, stride=2, padding=1, bias=outermost or innermost)
        downrelu = nn.LeakyReLU(0.2, inplace=True)
        downnorm = nn.BatchNorm2d(inner_ch)
        uprelu = nn.ReLU(inplace=True)

        if outermost:
            upconv = nn.ConvTranspose2d(inner_ch * 2, outer_ch, 4, stride=2, padding=1)
            down = [downconv]
            up = [uprelu, upconv, nn.Tanh()]
            mid = [submodule]
        elif innermost:
            upconv = nn.ConvTranspose2d(inner_ch, outer_ch, 4, stride=2, padding=1, bias=False)
            down = [downrelu, downconv]
            up = [uprelu, upconv, nn.BatchNorm2d(outer_ch)]
            mid = []
        else:
            upconv = nn.ConvTranspose2d(inner_ch * 2, outer_ch, 4, stride=2, padding=1, bias=False)
            down = [downrelu, downconv, downnorm]
            up = [uprelu, upconv, nn.BatchNorm2d(outer_ch)]
            if dropout:
                up.append(nn.Dropout(dropout))
            mid = [submodule]
        self.model = nn.Sequential(*down, *mid, *up)

    def forward(self, x):
        if self.outermost:
            return self.model(x)
        return torch.cat([x, self.model(x)], dim=1)


class UNetGenerator(nn.Module):
    """Condition -> image, output in [-1, 1], same spatial size as the input.

    ``num_downs`` halvings take the input to 1x1 at the bottleneck, so the
    input side must be 2**num_downs (8 levels for 256x256).
    """

    def __init__(self, in_channels=1, out_channels=1, base_channels=64,
                 num_downs=8, dropout=0.5):
        super().__init__()
        if num_downs < 5:
            raise ValueError(f"num_downs must be >= 5, got {num_downs}")
        nf = base_channels

        block = _SkipBlock(nf * 8, nf * 8, innermost=True)
        for _ in range(num_downs - 5):
            block = _SkipBlock(nf * 8, nf * 8, submodule=block, dropout=dropout)
        block = _SkipBlock(nf * 4, nf * 8, submodule=block)
        block = _SkipBlock(nf * 2, nf * 4, submodule=block)
        block = _SkipBlock(nf, nf * 2, submodule=block)
        self.model = _SkipBlock(out_channels, nf, in_ch=in_channels,
                                submodule=block, outermost=True)
        init_weights(self)

    def forward(self, condition):
        return self.model(condition)


class PatchDiscriminator(nn.Module):
    """PatchGAN over channel-concatenated (condition, image) pairs."""

    def __init__(self, in_channels=2, base_channels=64, num_layers=3):
        super().__init__()
        nf = base_channels
        layers = [nn.Conv2d(in_channels, nf, 4, stride=2, padding=1),
                  nn.LeakyReLU(0.2, inplace=True)]
        mult = 1
        for i in range(1, num_layers):
            prev, mult = mult, min(2 ** i, 8)
            layers += [nn.Conv2d(nf * prev, nf * mult, 4, stride=2, padding=1, bias=False),
                       nn.BatchNorm2d(nf * mult),
                       nn.LeakyReLU(0.2, inplace=True)]
        prev, mult = mult, min(2 ** num_layers, 8)
        layers += [nn.Conv2d(nf * prev, nf * mult, 4, stride=1, padding=1, bias=False),
                   nn.BatchNorm2d(nf * mult),
                   nn.LeakyReLU(0.2, inplace=True),
                   nn.Conv2d(nf * mult, 1, 4, stride=1, padding=1)]
        self.model = nn.Sequential(*layers)
        init_weights(self)

    def forward(self, condition, image):
        return self.model(torch.cat([condition, image], dim=1))
