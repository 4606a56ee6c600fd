"""skillab: offline skill extraction with contrastive state-transition
embeddings, dynamic skill-length relabeling, and skill-space controllers.

Subpackages
-----------
diffcore    minimal differentiable-computation kernel (params, MLP/RNN
            forward passes, reverse-mode gradients, Adam, Gaussians)
envs        desk-scale environments and scripted data collectors
dataset     trajectory storage, skill-window / negative sampling, file format
skillmodel  the eight networks, the training losses, and the training loop
relabel     dynamic skill-length relabeling
downstream  skill-space SAC and CEM controllers with dynamic termination
harness     CLI, configuration, experiment orchestration, metric export
"""

__version__ = "0.1.0"
