package com.acme.orders.api;

import java.util.concurrent.LinkedBlockingQueue;

public class OrderControllerTest {
    public void createsOrder() {
        OrderController controller = new OrderController(new LinkedBlockingQueue<>());
        controller.createOrder(new OrderDTO());
    }
}
