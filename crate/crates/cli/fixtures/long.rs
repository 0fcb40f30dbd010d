structure long over met
points u v w
edge eq[1/2](u,v), eq[1/4](v,w)
